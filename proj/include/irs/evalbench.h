#pragma once

// Evaluation against synthetic ground truth (top-5 semantic accuracy,
// class-agnostic AP) and the fusion-mode timing harness.

#include "irs/fusion.h"
#include "irs/model.h"
#include "irs/semantics.h"
#include "irs/synth.h"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace irs {

struct GtInstance {
  int id = 0;
  std::string label;
  VoxelSet voxels;
};

/// Observed ground-truth objects voxelized at `voxel_size`.
std::vector<GtInstance> gt_instances(const GroundTruth& gt, double voxel_size);

/// |a ∩ b| / |a ∪ b|; 0 when both are empty.
double voxel_iou(const VoxelSet& a, const VoxelSet& b);

struct InstanceMatch {
  int pred = 0;  // instance id
  int gt = 0;    // ground-truth object id
  double iou = 0.0;
  bool operator==(const InstanceMatch&) const = default;
};

/// Greedy one-to-one matching by (IoU desc, pred id asc, gt id asc); pairs
/// below iou_thr stay unmatched.
std::vector<InstanceMatch> match_instances(std::span<const Instance> pred,
                                           std::span<const GtInstance> gt, double iou_thr);

/// Percent of ground-truth instances whose matched prediction ranks the true
/// label among its 5 most similar vocabulary labels (all labels when the
/// vocabulary is smaller). Unmatched ground truth counts as a miss.
double top5_accuracy(std::span<const Instance> pred, std::span<const GtInstance> gt,
                     const PrototypeSet& vocab, double iou_thr);

/// Area under the all-point interpolated precision/recall curve, with
/// confidence = instance weight. nullopt when there is no ground truth.
std::optional<double> class_agnostic_ap(std::span<const Instance> pred,
                                        std::span<const GtInstance> gt, double iou_thr);

struct ClassStats {
  size_t gt = 0;
  size_t matched = 0;
  size_t top5_hits = 0;
};

struct EvalReport {
  double iou_threshold = 0.5;
  double top5 = 0.0;          // percent
  std::optional<double> ap;   // percent; nullopt prints as n/a
  size_t gt_count = 0;
  size_t pred_count = 0;
  size_t matched = 0;
  size_t unmatched_pred = 0;
  size_t unmatched_gt = 0;
  std::map<std::string, ClassStats> per_class;
};

/// Throws Error when the vocabulary dimension differs from the graph or a
/// ground-truth label is missing from the vocabulary.
EvalReport evaluate(const SceneGraph& graph, const GroundTruth& gt, const PrototypeSet& vocab,
                    double iou_thr = 0.5);

std::string format_eval_table(const EvalReport& r);
std::string format_eval_kv(const EvalReport& r);
std::string format_eval_csv(const EvalReport& r);

struct BenchReport {
  struct ModeTiming {
    FusionMode mode = FusionMode::kParallel;
    std::vector<double> runs;  // seconds
    double median = 0.0;
  };
  std::vector<ModeTiming> modes;
  size_t observations = 0;
  size_t rooms = 0;
  size_t instances = 0;
  int workers = 0;
  unsigned hardware_threads = 0;
  /// (t_serial - t_parallel) / t_serial * 100 against serial_global (or
  /// serial_rooms when global was not run); nullopt without both.
  std::optional<double> speedup_percent;

  const ModeTiming* find(FusionMode m) const;
};

/// Times the fusion stage (partitioning through instance output) per mode:
/// one untimed warm-up, then `runs` timed runs, median reported. Throws
/// Error when the instance partitions differ between modes.
BenchReport bench_fusion(std::span<const MaskObservation> obs, const RoomSet& rooms,
                         const Config& cfg, const std::vector<FusionMode>& modes, int runs = 3);

std::string format_bench_table(const BenchReport& r);
std::string format_bench_kv(const BenchReport& r);
std::string format_bench_csv(const BenchReport& r);

}  // namespace irs
