#include "irs/geometry.h"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace irs {

// ---------------------------------------------------------------------------
// AABB

double AABB::volume() const {
  if (empty()) return 0.0;
  const Vec3 d = max - min;
  return d.x() * d.y() * d.z();
}

double AABB::xy_area() const {
  if (empty()) return 0.0;
  return (max.x() - min.x()) * (max.y() - min.y());
}

void AABB::extend(const Vec3& p) {
  min = min.cwiseMin(p);
  max = max.cwiseMax(p);
}

void AABB::extend(const AABB& other) {
  if (other.empty()) return;
  min = min.cwiseMin(other.min);
  max = max.cwiseMax(other.max);
}

bool AABB::contains_xy(const Vec3& p, double tol) const {
  return p.x() >= min.x() - tol && p.x() <= max.x() + tol && p.y() >= min.y() - tol &&
         p.y() <= max.y() + tol;
}

double AABB::xy_distance(const Vec3& p) const {
  const double dx = std::max({min.x() - p.x(), 0.0, p.x() - max.x()});
  const double dy = std::max({min.y() - p.y(), 0.0, p.y() - max.y()});
  return std::hypot(dx, dy);
}

double AABB::xy_overlap_area(const AABB& other) const {
  if (empty() || other.empty()) return 0.0;
  const double dx = std::min(max.x(), other.max.x()) - std::max(min.x(), other.min.x());
  const double dy = std::min(max.y(), other.max.y()) - std::max(min.y(), other.min.y());
  if (dx < 0.0 || dy < 0.0) return 0.0;
  return dx * dy;
}

// ---------------------------------------------------------------------------
// VoxelSet

VoxelSet::VoxelSet(double voxel_size, std::vector<VoxelKey> cells)
    : voxel_size_(voxel_size), cells_(std::move(cells)) {
  std::sort(cells_.begin(), cells_.end());
  cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
}

bool VoxelSet::contains(const VoxelKey& key) const {
  return std::binary_search(cells_.begin(), cells_.end(), key);
}

size_t VoxelSet::intersection_size(const VoxelSet& other) const {
  size_t n = 0;
  auto a = cells_.begin();
  auto b = other.cells_.begin();
  while (a != cells_.end() && b != other.cells_.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      ++n;
      ++a;
      ++b;
    }
  }
  return n;
}

void VoxelSet::merge(const VoxelSet& other) {
  std::vector<VoxelKey> out;
  out.reserve(cells_.size() + other.cells_.size());
  std::set_union(cells_.begin(), cells_.end(), other.cells_.begin(), other.cells_.end(),
                 std::back_inserter(out));
  cells_ = std::move(out);
}

VoxelKey voxel_key(const Vec3& p, double voxel_size) {
  return VoxelKey{static_cast<int32_t>(std::floor(p.x() / voxel_size)),
                  static_cast<int32_t>(std::floor(p.y() / voxel_size)),
                  static_cast<int32_t>(std::floor(p.z() / voxel_size))};
}

VoxelSet voxelize(std::span<const Vec3> points, double voxel_size) {
  if (!(voxel_size > 0.0)) throw Error("voxelize: voxel_size must be > 0");
  std::vector<VoxelKey> cells;
  cells.reserve(points.size());
  for (const auto& p : points) cells.push_back(voxel_key(p, voxel_size));
  return VoxelSet(voxel_size, std::move(cells));
}

double voxel_overlap(const VoxelSet& a, const VoxelSet& b) {
  if (a.voxel_size() != b.voxel_size()) {
    throw Error("voxel_overlap: voxel sizes differ");
  }
  if (a.empty() || b.empty()) return 0.0;
  return static_cast<double>(a.intersection_size(b)) /
         static_cast<double>(std::min(a.size(), b.size()));
}

AABB compute_aabb(std::span<const Vec3> points) {
  if (points.empty()) throw Error("compute_aabb: empty point set");
  AABB box;
  for (const auto& p : points) box.extend(p);
  return box;
}

// ---------------------------------------------------------------------------
// PCA

Vec3 pca_normal(std::span<const Vec3> points) {
  if (points.size() < 3) throw Error("degenerate segment");
  Vec3 mean = Vec3::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Vec3 d = p - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("degenerate segment");
  const Vec3 evals = solver.eigenvalues();  // ascending
  if (!(evals(2) > 0.0) || evals(1) <= 1e-9 * evals(2)) {
    throw Error("degenerate segment");
  }
  Vec3 n = solver.eigenvectors().col(0).normalized();
  int largest = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(n(i)) > std::abs(n(largest))) largest = i;
  }
  if (n(largest) < 0.0) n = -n;
  return n;
}

StructuralSegment make_segment(StructuralClass cls, PointCloud points) {
  StructuralSegment seg;
  seg.cls = cls;
  seg.normal = pca_normal(points);
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points) sum += p;
  seg.centroid = sum / static_cast<double>(points.size());
  seg.points = std::move(points);
  return seg;
}

// ---------------------------------------------------------------------------
// DBSCAN

namespace {

class NeighborGrid {
 public:
  NeighborGrid(std::span<const Vec3> points, double eps) : points_(points), eps_(eps) {
    for (size_t i = 0; i < points.size(); ++i) {
      grid_[voxel_key(points[i], eps)].push_back(i);
    }
  }

  void neighbors(size_t i, std::vector<size_t>& out) const {
    out.clear();
    const Vec3& p = points_[i];
    const VoxelKey c = voxel_key(p, eps_);
    const double eps2 = eps_ * eps_;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = grid_.find(VoxelKey{c.x + dx, c.y + dy, c.z + dz});
          if (it == grid_.end()) continue;
          for (size_t j : it->second) {
            if ((points_[j] - p).squaredNorm() <= eps2) out.push_back(j);
          }
        }
      }
    }
  }

 private:
  std::span<const Vec3> points_;
  double eps_;
  std::unordered_map<VoxelKey, std::vector<size_t>, VoxelKeyHash> grid_;
};

}  // namespace

std::vector<int> dbscan_labels(std::span<const Vec3> points, double eps, int min_pts) {
  if (!(eps > 0.0)) throw Error("dbscan: eps must be > 0");
  if (min_pts < 1) throw Error("dbscan: min_pts must be >= 1");
  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(points.size(), kUnvisited);
  NeighborGrid grid(points, eps);
  std::vector<size_t> nbrs, inner;
  int cluster = 0;
  for (size_t i = 0; i < points.size(); ++i) {
    if (label[i] != kUnvisited) continue;
    grid.neighbors(i, nbrs);
    if (static_cast<int>(nbrs.size()) < min_pts) {
      label[i] = kNoise;
      continue;
    }
    label[i] = cluster;
    std::deque<size_t> frontier(nbrs.begin(), nbrs.end());
    while (!frontier.empty()) {
      const size_t j = frontier.front();
      frontier.pop_front();
      if (label[j] == kNoise) label[j] = cluster;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = cluster;
      grid.neighbors(j, inner);
      if (static_cast<int>(inner.size()) >= min_pts) {
        frontier.insert(frontier.end(), inner.begin(), inner.end());
      }
    }
    ++cluster;
  }
  return label;
}

PointCloud dbscan_filter(std::span<const Vec3> points, double eps, int min_pts) {
  const std::vector<int> label = dbscan_labels(points, eps, min_pts);
  int n_clusters = 0;
  for (int l : label) n_clusters = std::max(n_clusters, l + 1);
  if (n_clusters == 0) return {};
  std::vector<size_t> count(n_clusters, 0);
  std::vector<size_t> first(n_clusters, points.size());
  for (size_t i = 0; i < label.size(); ++i) {
    if (label[i] < 0) continue;
    ++count[label[i]];
    first[label[i]] = std::min(first[label[i]], i);
  }
  int best = 0;
  for (int c = 1; c < n_clusters; ++c) {
    if (count[c] > count[best] || (count[c] == count[best] && first[c] < first[best])) best = c;
  }
  PointCloud out;
  out.reserve(count[best]);
  for (size_t i = 0; i < label.size(); ++i) {
    if (label[i] == best) out.push_back(points[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Box region extraction

PlanarGridIndex::PlanarGridIndex(std::span<const Vec3> cloud, double cell_size)
    : cloud_(cloud), cell_size_(cell_size) {
  if (cloud.empty()) return;
  if (!(cell_size_ > 0.0)) {
    AABB box = compute_aabb(cloud);
    const double extent = std::max(box.max.x() - box.min.x(), box.max.y() - box.min.y());
    const double per_axis = std::max(1.0, std::sqrt(static_cast<double>(cloud.size()) / 16.0));
    cell_size_ = std::max(extent / per_axis, 1e-3);
  }
  min_cx_ = min_cy_ = std::numeric_limits<int64_t>::max();
  max_cx_ = max_cy_ = std::numeric_limits<int64_t>::min();
  for (size_t i = 0; i < cloud.size(); ++i) {
    const int64_t cx = cell_of(cloud[i].x());
    const int64_t cy = cell_of(cloud[i].y());
    cells_[{cx, cy}].push_back(i);
    min_cx_ = std::min(min_cx_, cx);
    max_cx_ = std::max(max_cx_, cx);
    min_cy_ = std::min(min_cy_, cy);
    max_cy_ = std::max(max_cy_, cy);
  }
}

int64_t PlanarGridIndex::cell_of(double v) const {
  return static_cast<int64_t>(std::floor(v / cell_size_));
}

std::vector<size_t> PlanarGridIndex::query_box(const Vec3& center, double half_side) const {
  std::vector<size_t> out;
  if (cloud_.empty()) return out;
  auto clamp_cell = [&](double v, int64_t lo, int64_t hi) {
    const double c = std::floor(v / cell_size_);
    if (c < static_cast<double>(lo)) return lo;
    if (c > static_cast<double>(hi)) return hi;
    return static_cast<int64_t>(c);
  };
  const int64_t x0 = clamp_cell(center.x() - half_side, min_cx_, max_cx_);
  const int64_t x1 = clamp_cell(center.x() + half_side, min_cx_, max_cx_);
  const int64_t y0 = clamp_cell(center.y() - half_side, min_cy_, max_cy_);
  const int64_t y1 = clamp_cell(center.y() + half_side, min_cy_, max_cy_);
  for (int64_t cx = x0; cx <= x1; ++cx) {
    for (int64_t cy = y0; cy <= y1; ++cy) {
      auto it = cells_.find({cx, cy});
      if (it == cells_.end()) continue;
      for (size_t i : it->second) {
        const Vec3& p = cloud_[i];
        if (std::abs(p.x() - center.x()) <= half_side &&
            std::abs(p.y() - center.y()) <= half_side) {
          out.push_back(i);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

PointCloud extract_box_region(const PlanarGridIndex& index, std::span<const Vec3> cloud,
                              const Vec3& center, double side) {
  if (!(side > 0.0)) throw Error("extract_box_region: N must be > 0");
  PointCloud out;
  for (size_t i : index.query_box(center, side / 2.0)) out.push_back(cloud[i]);
  return out;
}

PointCloud extract_box_region(std::span<const Vec3> cloud, const Vec3& center, double side) {
  if (!(side > 0.0)) throw Error("extract_box_region: N must be > 0");
  PlanarGridIndex index(cloud);
  return extract_box_region(index, cloud, center, side);
}

// ---------------------------------------------------------------------------
// Projection

PointCloud project_mask(const DepthImage& depth, std::span<const Pixel> mask,
                        const CameraIntrinsics& intr, const Pose& pose) {
  PointCloud out;
  out.reserve(mask.size());
  for (const Pixel& px : mask) {
    if (px.u < 0 || px.v < 0 || px.u >= depth.width || px.v >= depth.height) {
      throw Error("project_mask: pixel (" + std::to_string(px.u) + "," + std::to_string(px.v) +
                  ") outside image");
    }
    const double d = depth.at(px.u, px.v);
    if (!(d > 0.0) || !std::isfinite(d)) continue;
    const Vec3 cam((px.u - intr.cx) * d / intr.fx, (px.v - intr.cy) * d / intr.fy, d);
    out.push_back(pose.apply(cam));
  }
  return out;
}

}  // namespace irs
