#pragma once

// Incremental room segmentation from structural segments (walls, doors,
// windows, floors, ceilings) cut around successive robot positions.

#include "irs/geometry.h"
#include "irs/model.h"

#include <span>
#include <string>
#include <vector>

namespace irs {

struct RoomSet {
  std::vector<Room> rooms;
  std::vector<StructuralSegment> unmerged;  // horizontals with no room yet

  bool empty() const { return rooms.empty(); }
  size_t total_segments() const;
};

/// A labelled structural point as delivered by the upstream point-cloud
/// segmenter: class id plus the segmenter's per-scan instance id.
struct StructuralPoint {
  Vec3 p = Vec3::Zero();
  StructuralClass cls = StructuralClass::kWall;
  uint32_t instance = 0;

  bool operator==(const StructuralPoint&) const = default;
};

/// Groups points by (class, instance) and splits every group into
/// 26-connected voxel components. Components with fewer than `min_points`
/// points or a degenerate PCA are dropped.
std::vector<StructuralSegment> split_structural_segments(std::span<const StructuralPoint> points,
                                                         double voxel_size,
                                                         size_t min_points = 10);

/// Wall criterion between two segments with precomputed voxel sets.
bool walls_match(const VoxelSet& a, const Vec3& normal_a, const VoxelSet& b,
                 const Vec3& normal_b, const Config& cfg);

/// Floor/ceiling criterion: same class, |dz| <= tau3 and footprint overlap >= tau1.
bool horizontals_match(const StructuralSegment& a, const VoxelSet& footprint_a,
                       const StructuralSegment& b, const VoxelSet& footprint_b,
                       const Config& cfg);

/// Voxels of the xy projection of a segment (z collapsed to 0).
VoxelSet footprint_voxels(std::span<const Vec3> points, double voxel_size);

/// Absorbs a wall/door/window segment into `room` when it matches a member
/// wall. Returns whether it was absorbed.
bool try_merge_wall(Room& room, const StructuralSegment& seg, const Config& cfg);

/// Absorbs a floor/ceiling segment when it matches a same-class member.
bool try_merge_horizontal(Room& room, const StructuralSegment& seg, const Config& cfg);

/// xy from wall points (all points if the room has no walls); z from floor and
/// ceiling centroids when present, otherwise from wall points.
AABB room_bbox(const Room& room);

/// Room whose xy box contains p (smallest volume wins), else the room nearest
/// in xy. Throws Error("no rooms segmented") on an empty set.
int assign_room(const Vec3& p, const RoomSet& rooms);

/// Stateful form of the segmentation loop; one call per robot position.
class RoomSegmenter {
 public:
  explicit RoomSegmenter(const Config& cfg);

  void add_batch(std::vector<StructuralSegment> batch);
  const RoomSet& room_set() const { return set_; }
  RoomSet finish() &&;

  /// Human-readable record of room merges triggered by bridging segments.
  const std::vector<std::string>& events() const { return events_; }

 private:
  struct Member {
    VoxelSet voxels;
    VoxelSet footprint;
  };
  struct RoomCache {
    std::vector<Member> walls;
    std::vector<Member> horizontals;
  };

  void add_wall(StructuralSegment seg);
  bool add_horizontal(StructuralSegment& seg);
  void retry_backlog();
  void merge_rooms(std::vector<size_t> indices);
  void refresh_bbox(size_t room_index);

  Config cfg_;
  RoomSet set_;
  std::vector<RoomCache> cache_;
  std::vector<std::string> events_;
};

/// Runs the segmenter over every batch in order.
RoomSet segment_rooms(const std::vector<std::vector<StructuralSegment>>& batches,
                      const Config& cfg);

}  // namespace irs
