#include "irs/pipeline.h"

#include <chrono>

namespace irs {

namespace {

constexpr size_t kMinSegmentPoints = 10;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<std::vector<StructuralSegment>> structural_batches(const Sequence& seq,
                                                               const Config& cfg) {
  std::vector<std::vector<StructuralSegment>> batches;
  for (const auto& f : seq.frames) {
    if (!f.has_structs) continue;
    std::vector<Vec3> xyz;
    xyz.reserve(f.structs.size());
    for (const auto& sp : f.structs) xyz.push_back(sp.p);
    const PlanarGridIndex index(xyz);
    std::vector<StructuralPoint> region;
    for (size_t i : index.query_box(f.pose.translation, 0.5 * cfg.block_size)) {
      region.push_back(f.structs[i]);
    }
    batches.push_back(split_structural_segments(region, cfg.voxel_size, kMinSegmentPoints));
  }
  return batches;
}

std::optional<MaskObservation> make_observation(const Frame& frame, const FrameMask& mask,
                                                const CameraIntrinsics& intr, const Config& cfg) {
  const PointCloud raw = project_mask(frame.depth, mask.pixels, intr, frame.pose);
  PointCloud pts = dbscan_filter(raw, cfg.dbscan_eps, cfg.dbscan_min_pts);
  if (static_cast<int>(pts.size()) < cfg.min_mask_points) return std::nullopt;
  MaskObservation obs;
  obs.frame_id = frame.id;
  obs.mask_id = mask.mask_id;
  obs.points = std::move(pts);
  obs.embeddings = mask.embeddings;
  obs.fused = fuse_modalities(mask.embeddings[0], mask.embeddings[1], mask.embeddings[2], cfg.alpha);
  return obs;
}

std::vector<MaskObservation> extract_observations(const Sequence& seq, const Config& cfg) {
  std::vector<MaskObservation> out;
  for (const auto& f : seq.frames) {
    for (const auto& m : f.masks) {
      if (auto obs = make_observation(f, m, seq.intrinsics, cfg)) out.push_back(std::move(*obs));
    }
  }
  return out;
}

BuildResult run_build(const Sequence& seq, const Config& cfg, FusionMode mode) {
  validate_config(cfg);
  BuildResult result;
  auto stage = [&](const std::string& name, auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
    result.timings.push_back({name, seconds_since(t0)});
  };

  RoomSet rooms;
  stage("roomseg", [&] {
    RoomSegmenter seg(cfg);
    for (auto& batch : structural_batches(seq, cfg)) seg.add_batch(std::move(batch));
    rooms = std::move(seg).finish();
    if (rooms.empty()) throw Error("no rooms segmented");
  });

  std::vector<MaskObservation> obs;
  stage("observations", [&] {
    obs = extract_observations(seq, cfg);
    size_t total = 0;
    for (const auto& f : seq.frames) total += f.masks.size();
    result.observations = obs.size();
    result.dropped_masks = total - obs.size();
  });

  FusionResult fused;
  stage("fusion", [&] { fused = run_fusion(obs, rooms, cfg, mode); });

  stage("graph", [&] {
    GraphBuildReport report;
    result.graph = build_graph(std::move(rooms), std::move(fused.instances), seq.prototypes,
                               cfg.voxel_size, &report);
    if (result.graph.embedding_dim == 0) result.graph.embedding_dim = seq.dim;
    result.warnings = std::move(report.warnings);
  });
  return result;
}

}  // namespace irs
