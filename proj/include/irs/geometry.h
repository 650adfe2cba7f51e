#pragma once

// Spatial primitives: box extraction, voxel sets, PCA normals, DBSCAN
// filtering and pinhole back-projection.

#include "irs/geometry_types.h"
#include "irs/model.h"

#include <span>
#include <unordered_map>
#include <vector>

namespace irs {

struct VoxelKeyHash {
  size_t operator()(const VoxelKey& k) const {
    return static_cast<size_t>(k.x) * 73856093ULL ^ static_cast<size_t>(k.y) * 19349669ULL ^
           static_cast<size_t>(k.z) * 83492791ULL;
  }
};

VoxelKey voxel_key(const Vec3& p, double voxel_size);

/// Throws Error if voxel_size <= 0.
VoxelSet voxelize(std::span<const Vec3> points, double voxel_size);

/// |a ∩ b| / min(|a|, |b|); 0 when either set is empty.
/// Throws Error when voxel sizes differ.
double voxel_overlap(const VoxelSet& a, const VoxelSet& b);

/// Throws Error on empty input.
AABB compute_aabb(std::span<const Vec3> points);

/// Smallest-eigenvalue eigenvector of the point covariance, sign-canonical
/// (largest-magnitude component positive). Throws Error("degenerate segment")
/// when fewer than 3 points or the points are collinear.
Vec3 pca_normal(std::span<const Vec3> points);

/// Builds a StructuralSegment (centroid + PCA normal). Throws on degenerate
/// point sets.
StructuralSegment make_segment(StructuralClass cls, PointCloud points);

/// Largest DBSCAN cluster (ties: the cluster containing the lowest point
/// index). Points keep their input order. Empty when everything is noise.
PointCloud dbscan_filter(std::span<const Vec3> points, double eps, int min_pts);

/// Per-point DBSCAN labels: -1 for noise, clusters numbered in discovery order.
std::vector<int> dbscan_labels(std::span<const Vec3> points, double eps, int min_pts);

/// Static xy-grid index over a point cloud for square region queries.
class PlanarGridIndex {
 public:
  /// `cell_size` <= 0 picks a size from the cloud extent.
  explicit PlanarGridIndex(std::span<const Vec3> cloud, double cell_size = 0.0);

  /// Indices (ascending) of points with |dx|, |dy| <= half_side.
  std::vector<size_t> query_box(const Vec3& center, double half_side) const;

  size_t size() const { return cloud_.size(); }

 private:
  struct CellHash {
    size_t operator()(const std::pair<int64_t, int64_t>& c) const {
      return static_cast<size_t>(c.first) * 73856093ULL ^ static_cast<size_t>(c.second) * 19349669ULL;
    }
  };
  int64_t cell_of(double v) const;

  std::span<const Vec3> cloud_;
  double cell_size_ = 1.0;
  std::unordered_map<std::pair<int64_t, int64_t>, std::vector<size_t>, CellHash> cells_;
  int64_t min_cx_ = 0, max_cx_ = -1, min_cy_ = 0, max_cy_ = -1;
};

/// Points p with |p.x - center.x| <= N/2 and |p.y - center.y| <= N/2.
/// Throws Error when N <= 0.
PointCloud extract_box_region(const PlanarGridIndex& index, std::span<const Vec3> cloud,
                              const Vec3& center, double side);
PointCloud extract_box_region(std::span<const Vec3> cloud, const Vec3& center, double side);

/// Row-major 32-bit float depth in meters; 0 marks an invalid pixel.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h, 0.0f) {}
  float at(int u, int v) const { return data[static_cast<size_t>(v) * width + u]; }
  float& at(int u, int v) { return data[static_cast<size_t>(v) * width + u]; }
  bool operator==(const DepthImage&) const = default;
};

struct Pixel {
  int u = 0;
  int v = 0;
  bool operator==(const Pixel&) const = default;
};

/// Back-projects valid mask pixels through the pinhole model into the world
/// frame. Throws Error for pixels outside the image.
PointCloud project_mask(const DepthImage& depth, std::span<const Pixel> mask,
                        const CameraIntrinsics& intr, const Pose& pose);

}  // namespace irs
