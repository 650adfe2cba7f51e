#pragma once

// End-to-end graph construction from a recorded sequence:
// structural scans -> rooms, masks -> observations -> fusion -> graph.

#include "irs/fusion.h"
#include "irs/graph.h"
#include "irs/roomseg.h"
#include "irs/synth.h"

#include <string>
#include <vector>

namespace irs {

/// One batch of structural segments per scan frame, cut to the N-box around
/// the robot position.
std::vector<std::vector<StructuralSegment>> structural_batches(const Sequence& seq,
                                                               const Config& cfg);

/// Back-projects, filters and fuses the embeddings of one mask. Returns
/// nullopt when fewer than cfg.min_mask_points points survive DBSCAN.
std::optional<MaskObservation> make_observation(const Frame& frame, const FrameMask& mask,
                                                const CameraIntrinsics& intr, const Config& cfg);

/// Observations of every frame in order.
std::vector<MaskObservation> extract_observations(const Sequence& seq, const Config& cfg);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct BuildResult {
  SceneGraph graph;
  std::vector<StageTiming> timings;
  size_t observations = 0;
  size_t dropped_masks = 0;
  std::vector<std::string> warnings;
};

/// Thrown by run_build with the name of the failing stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

BuildResult run_build(const Sequence& seq, const Config& cfg,
                      FusionMode mode = FusionMode::kParallel);

}  // namespace irs
