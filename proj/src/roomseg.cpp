#include "irs/roomseg.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace irs {

size_t RoomSet::total_segments() const {
  size_t n = 0;
  for (const auto& r : rooms) n += r.segment_count();
  return n;
}

// ---------------------------------------------------------------------------
// Pre-splitting

std::vector<StructuralSegment> split_structural_segments(std::span<const StructuralPoint> points,
                                                         double voxel_size, size_t min_points) {
  // Groups in order of first appearance.
  std::map<std::pair<uint32_t, uint32_t>, size_t> group_index;
  std::vector<std::vector<size_t>> groups;
  std::vector<StructuralClass> group_class;
  for (size_t i = 0; i < points.size(); ++i) {
    const auto key = std::make_pair(static_cast<uint32_t>(points[i].cls), points[i].instance);
    auto [it, inserted] = group_index.try_emplace(key, groups.size());
    if (inserted) {
      groups.emplace_back();
      group_class.push_back(points[i].cls);
    }
    groups[it->second].push_back(i);
  }

  std::vector<StructuralSegment> out;
  for (size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g];
    std::unordered_map<VoxelKey, std::vector<size_t>, VoxelKeyHash> cells;
    std::vector<VoxelKey> cell_order;
    for (size_t i : members) {
      const VoxelKey k = voxel_key(points[i].p, voxel_size);
      auto& bucket = cells[k];
      if (bucket.empty()) cell_order.push_back(k);
      bucket.push_back(i);
    }
    std::unordered_map<VoxelKey, int, VoxelKeyHash> component;
    std::vector<std::vector<size_t>> comps;
    for (const VoxelKey& seed : cell_order) {
      if (component.count(seed)) continue;
      const int id = static_cast<int>(comps.size());
      comps.emplace_back();
      std::deque<VoxelKey> frontier{seed};
      component[seed] = id;
      while (!frontier.empty()) {
        const VoxelKey c = frontier.front();
        frontier.pop_front();
        const auto& bucket = cells[c];
        comps[id].insert(comps[id].end(), bucket.begin(), bucket.end());
        for (int dx = -1; dx <= 1; ++dx) {
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dz = -1; dz <= 1; ++dz) {
              const VoxelKey n{c.x + dx, c.y + dy, c.z + dz};
              if (!cells.count(n) || component.count(n)) continue;
              component[n] = id;
              frontier.push_back(n);
            }
          }
        }
      }
    }
    for (auto& comp : comps) {
      if (comp.size() < std::max<size_t>(min_points, 3)) continue;
      std::sort(comp.begin(), comp.end());
      PointCloud pts;
      pts.reserve(comp.size());
      for (size_t i : comp) pts.push_back(points[i].p);
      try {
        out.push_back(make_segment(group_class[g], std::move(pts)));
      } catch (const Error&) {
        // degenerate sliver (e.g. a single column of points); not a usable segment
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Merge criteria

bool walls_match(const VoxelSet& a, const Vec3& normal_a, const VoxelSet& b,
                 const Vec3& normal_b, const Config& cfg) {
  const double c2 = std::abs(normal_a.dot(normal_b));
  const double c1 = voxel_overlap(a, b);
  if (c1 >= cfg.tau_wall_overlap && c2 >= cfg.tau_wall_normal) return true;
  // Corner continuation: perpendicular walls that share at least one voxel.
  if (cfg.corner_rule && c2 <= 1.0 - cfg.tau_wall_normal) {
    return a.intersection_size(b) > 0;
  }
  return false;
}

VoxelSet footprint_voxels(std::span<const Vec3> points, double voxel_size) {
  PointCloud flat;
  flat.reserve(points.size());
  for (const auto& p : points) flat.emplace_back(p.x(), p.y(), 0.0);
  return voxelize(flat, voxel_size);
}

bool horizontals_match(const StructuralSegment& a, const VoxelSet& footprint_a,
                       const StructuralSegment& b, const VoxelSet& footprint_b,
                       const Config& cfg) {
  if (a.cls != b.cls) return false;
  const double c3 = std::abs(a.centroid.z() - b.centroid.z());
  if (c3 > cfg.tau_height) return false;
  return voxel_overlap(footprint_a, footprint_b) >= cfg.tau_wall_overlap;
}

bool try_merge_wall(Room& room, const StructuralSegment& seg, const Config& cfg) {
  if (!is_wall_like(seg.cls)) return false;
  const VoxelSet seg_voxels = voxelize(seg.points, cfg.voxel_size);
  for (const auto& wall : room.wall_segments) {
    if (walls_match(voxelize(wall.points, cfg.voxel_size), wall.normal, seg_voxels, seg.normal,
                    cfg)) {
      room.wall_segments.push_back(seg);
      room.bbox = room_bbox(room);
      return true;
    }
  }
  return false;
}

bool try_merge_horizontal(Room& room, const StructuralSegment& seg, const Config& cfg) {
  if (is_wall_like(seg.cls)) return false;
  const VoxelSet seg_fp = footprint_voxels(seg.points, cfg.voxel_size);
  for (const auto& member : room.horizontal_segments) {
    if (horizontals_match(member, footprint_voxels(member.points, cfg.voxel_size), seg, seg_fp,
                          cfg)) {
      room.horizontal_segments.push_back(seg);
      room.bbox = room_bbox(room);
      return true;
    }
  }
  return false;
}

AABB room_bbox(const Room& room) {
  AABB walls, horizontals;
  for (const auto& s : room.wall_segments) {
    for (const auto& p : s.points) walls.extend(p);
  }
  std::optional<double> floor_z, ceiling_z;
  for (const auto& s : room.horizontal_segments) {
    for (const auto& p : s.points) horizontals.extend(p);
    const double z = s.centroid.z();
    if (s.cls == StructuralClass::kFloor) floor_z = floor_z ? std::min(*floor_z, z) : z;
    if (s.cls == StructuralClass::kCeiling) ceiling_z = ceiling_z ? std::max(*ceiling_z, z) : z;
  }
  AABB box = walls.empty() ? horizontals : walls;
  if (box.empty()) return box;
  if (floor_z) box.min.z() = *floor_z;
  if (ceiling_z) box.max.z() = *ceiling_z;
  if (box.min.z() > box.max.z()) std::swap(box.min.z(), box.max.z());
  return box;
}

int assign_room(const Vec3& p, const RoomSet& rooms) {
  if (rooms.rooms.empty()) throw Error("no rooms segmented");
  const Room* best = nullptr;
  for (const auto& r : rooms.rooms) {
    if (!r.bbox.contains_xy(p)) continue;
    if (!best || r.bbox.volume() < best->bbox.volume()) best = &r;
  }
  if (best) return best->id;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& r : rooms.rooms) {
    const double d = r.bbox.xy_distance(p);
    if (d < best_d) {
      best_d = d;
      best = &r;
    }
  }
  return best ? best->id : rooms.rooms.front().id;
}

// ---------------------------------------------------------------------------
// RoomSegmenter

RoomSegmenter::RoomSegmenter(const Config& cfg) : cfg_(validate_config(cfg)) {}

void RoomSegmenter::add_batch(std::vector<StructuralSegment> batch) {
  for (auto& seg : batch) {
    if (is_wall_like(seg.cls)) {
      add_wall(std::move(seg));
    } else if (!add_horizontal(seg)) {
      set_.unmerged.push_back(std::move(seg));
    }
  }
  retry_backlog();
}

void RoomSegmenter::add_wall(StructuralSegment seg) {
  Member m{voxelize(seg.points, cfg_.voxel_size), {}};
  std::vector<size_t> matches;
  for (size_t r = 0; r < set_.rooms.size(); ++r) {
    const Room& room = set_.rooms[r];
    for (size_t w = 0; w < room.wall_segments.size(); ++w) {
      if (walls_match(cache_[r].walls[w].voxels, room.wall_segments[w].normal, m.voxels,
                      seg.normal, cfg_)) {
        matches.push_back(r);
        break;
      }
    }
  }
  if (matches.empty()) {
    Room room;
    room.id = static_cast<int>(set_.rooms.size());
    room.wall_segments.push_back(std::move(seg));
    set_.rooms.push_back(std::move(room));
    cache_.push_back(RoomCache{{std::move(m)}, {}});
    refresh_bbox(set_.rooms.size() - 1);
    return;
  }
  const size_t target = matches.front();
  set_.rooms[target].wall_segments.push_back(std::move(seg));
  cache_[target].walls.push_back(std::move(m));
  if (matches.size() > 1) {
    merge_rooms(std::move(matches));
  } else {
    refresh_bbox(target);
  }
}

bool RoomSegmenter::add_horizontal(StructuralSegment& seg) {
  const VoxelSet fp = footprint_voxels(seg.points, cfg_.voxel_size);
  for (size_t r = 0; r < set_.rooms.size(); ++r) {
    const Room& room = set_.rooms[r];
    for (size_t h = 0; h < room.horizontal_segments.size(); ++h) {
      if (horizontals_match(room.horizontal_segments[h], cache_[r].horizontals[h].footprint, seg,
                            fp, cfg_)) {
        set_.rooms[r].horizontal_segments.push_back(std::move(seg));
        cache_[r].horizontals.push_back(Member{{}, fp});
        refresh_bbox(r);
        return true;
      }
    }
  }
  // First floor/ceiling piece of a room: the room whose wall box holds it.
  std::optional<size_t> host;
  for (size_t r = 0; r < set_.rooms.size(); ++r) {
    const Room& room = set_.rooms[r];
    if (room.wall_segments.empty() || !room.bbox.contains_xy(seg.centroid)) continue;
    if (!host || room.bbox.xy_area() < set_.rooms[*host].bbox.xy_area()) host = r;
  }
  if (!host) return false;
  set_.rooms[*host].horizontal_segments.push_back(std::move(seg));
  cache_[*host].horizontals.push_back(Member{{}, fp});
  refresh_bbox(*host);
  return true;
}

void RoomSegmenter::retry_backlog() {
  bool progress = true;
  while (progress && !set_.unmerged.empty()) {
    progress = false;
    std::vector<StructuralSegment> pending;
    pending.swap(set_.unmerged);
    for (auto& seg : pending) {
      if (add_horizontal(seg)) {
        progress = true;
      } else {
        set_.unmerged.push_back(std::move(seg));
      }
    }
  }
}

void RoomSegmenter::merge_rooms(std::vector<size_t> indices) {
  std::sort(indices.begin(), indices.end());
  const size_t target = indices.front();
  std::ostringstream msg;
  msg << "merged rooms";
  for (size_t i : indices) msg << ' ' << set_.rooms[i].id;
  msg << " into room " << set_.rooms[target].id;
  for (auto it = indices.rbegin(); it != indices.rend() - 1; ++it) {
    Room& src = set_.rooms[*it];
    Room& dst = set_.rooms[target];
    RoomCache& src_cache = cache_[*it];
    RoomCache& dst_cache = cache_[target];
    for (size_t w = 0; w < src.wall_segments.size(); ++w) {
      dst.wall_segments.push_back(std::move(src.wall_segments[w]));
      dst_cache.walls.push_back(std::move(src_cache.walls[w]));
    }
    for (size_t h = 0; h < src.horizontal_segments.size(); ++h) {
      dst.horizontal_segments.push_back(std::move(src.horizontal_segments[h]));
      dst_cache.horizontals.push_back(std::move(src_cache.horizontals[h]));
    }
    set_.rooms.erase(set_.rooms.begin() + static_cast<std::ptrdiff_t>(*it));
    cache_.erase(cache_.begin() + static_cast<std::ptrdiff_t>(*it));
  }
  for (size_t r = 0; r < set_.rooms.size(); ++r) set_.rooms[r].id = static_cast<int>(r);
  refresh_bbox(target);
  events_.push_back(msg.str());
}

void RoomSegmenter::refresh_bbox(size_t room_index) {
  set_.rooms[room_index].bbox = room_bbox(set_.rooms[room_index]);
}

RoomSet RoomSegmenter::finish() && {
  retry_backlog();
  return std::move(set_);
}

RoomSet segment_rooms(const std::vector<std::vector<StructuralSegment>>& batches,
                      const Config& cfg) {
  RoomSegmenter seg(cfg);
  for (const auto& batch : batches) seg.add_batch(batch);
  return std::move(seg).finish();
}

}  // namespace irs
