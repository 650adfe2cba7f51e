#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <limits>
#include <vector>

namespace irs {

using Vec3 = Eigen::Vector3d;
using PointCloud = std::vector<Vec3>;

/// Axis-aligned box. A default-constructed box is empty (min > max).
struct AABB {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  bool empty() const { return (min.array() > max.array()).any(); }
  double volume() const;
  double xy_area() const;
  Vec3 center() const { return 0.5 * (min + max); }

  void extend(const Vec3& p);
  void extend(const AABB& other);

  bool contains_xy(const Vec3& p, double tol = 0.0) const;
  /// Euclidean distance from p to the box footprint in the xy plane (0 inside).
  double xy_distance(const Vec3& p) const;
  /// Area of the xy-footprint intersection of two boxes.
  double xy_overlap_area(const AABB& other) const;

  bool operator==(const AABB& other) const = default;
};

struct VoxelKey {
  int32_t x = 0;
  int32_t y = 0;
  int32_t z = 0;

  auto operator<=>(const VoxelKey&) const = default;
  bool operator==(const VoxelKey&) const = default;
};

/// Set of occupied voxel cells, stored sorted and unique.
class VoxelSet {
 public:
  VoxelSet() = default;
  explicit VoxelSet(double voxel_size) : voxel_size_(voxel_size) {}
  VoxelSet(double voxel_size, std::vector<VoxelKey> cells);

  double voxel_size() const { return voxel_size_; }
  const std::vector<VoxelKey>& cells() const { return cells_; }
  size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  bool contains(const VoxelKey& key) const;

  size_t intersection_size(const VoxelSet& other) const;
  void merge(const VoxelSet& other);

  bool operator==(const VoxelSet& other) const = default;

 private:
  double voxel_size_ = 0.0;
  std::vector<VoxelKey> cells_;
};

}  // namespace irs
