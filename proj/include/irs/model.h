#pragma once

// Domain types shared by every stage of the scene-graph pipeline.

#include "irs/geometry_types.h"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace irs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rigid camera-to-world transform: world = rotation * p + translation.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();

  /// Throws if rotation is not orthonormal with det +1 (tol 1e-6).
  static Pose make(const Eigen::Matrix3d& rotation, const Vec3& translation);
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  void validate() const;
  bool operator==(const CameraIntrinsics&) const = default;
};

/// Unit-norm feature vector. Every constructor normalizes.
class Embedding {
 public:
  Embedding() = default;

  /// Normalizes `values`; throws Error on a zero or non-finite vector.
  static Embedding normalized(std::vector<double> values);
  /// Keeps `values` bit-for-bit; throws Error unless the norm is 1 +- 1e-6.
  static Embedding from_unit(std::vector<double> values);

  size_t dim() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](size_t i) const { return values_[i]; }

  bool operator==(const Embedding&) const = default;

 private:
  std::vector<double> values_;
};

enum class StructuralClass : uint8_t {
  kWall = 0,
  kDoor = 1,
  kWindow = 2,
  kCeiling = 3,
  kFloor = 4,
};

std::string_view to_string(StructuralClass cls);
std::optional<StructuralClass> structural_class_from_id(uint32_t id);
std::optional<StructuralClass> parse_structural_class(std::string_view name);
inline bool is_wall_like(StructuralClass c) {
  return c == StructuralClass::kWall || c == StructuralClass::kDoor ||
         c == StructuralClass::kWindow;
}

struct StructuralSegment {
  StructuralClass cls = StructuralClass::kWall;
  PointCloud points;
  Vec3 centroid = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();

  bool operator==(const StructuralSegment&) const = default;
};

struct Room {
  int id = 0;
  std::vector<StructuralSegment> wall_segments;
  std::vector<StructuralSegment> horizontal_segments;
  AABB bbox;
  std::optional<std::string> label;
  std::optional<Embedding> feature;

  size_t segment_count() const {
    return wall_segments.size() + horizontal_segments.size();
  }
  bool operator==(const Room&) const = default;
};

/// One 2D mask lifted into the world frame.
struct MaskObservation {
  int frame_id = 0;
  int mask_id = 0;
  PointCloud points;
  std::array<Embedding, 3> embeddings;
  Embedding fused;
  std::optional<int> room_id;

  Vec3 centroid() const;
};

struct Instance {
  int id = 0;
  PointCloud points;
  VoxelSet voxels;
  Embedding embedding;
  int64_t weight = 0;
  int room_id = 0;
  AABB bbox;

  Vec3 centroid() const;
  bool operator==(const Instance&) const = default;
};

struct BelongsToEdge {
  enum class Kind : uint8_t { kInstanceToRoom, kRoomToBuilding };
  Kind kind = Kind::kInstanceToRoom;
  int child = 0;
  int parent = 0;

  bool operator==(const BelongsToEdge&) const = default;
};

struct BuildingNode {
  int id = 0;
  std::string name = "building";
  bool operator==(const BuildingNode&) const = default;
};

struct SceneGraph {
  BuildingNode building;
  double voxel_size = 0.1;
  size_t embedding_dim = 0;
  std::vector<Room> rooms;
  std::vector<Instance> instances;
  std::vector<BelongsToEdge> edges;

  const Room* find_room(int id) const;
  const Instance* find_instance(int id) const;
  bool operator==(const SceneGraph&) const = default;
};

struct Config {
  double block_size = 10.0;       // N, side of the square region cut around the robot
  double tau_wall_overlap = 0.1;  // tau1
  double tau_wall_normal = 0.8;   // tau2
  double tau_height = 0.3;        // tau3, meters
  double tau_geometric = 0.3;     // tau_g
  double tau_semantic = 0.8;      // tau_s
  std::array<double, 3> alpha = {0.5, 0.25, 0.25};
  double voxel_size = 0.1;
  double dbscan_eps = 0.15;
  int dbscan_min_pts = 8;
  int min_mask_points = 20;
  int workers = 8;
  bool corner_rule = true;

  bool operator==(const Config&) const = default;
};

/// Returns cfg unchanged or throws Error naming the first violated field.
Config validate_config(const Config& cfg);

/// Sets one `key = value` entry. Throws Error on unknown keys or bad values.
void set_config_value(Config& cfg, std::string_view key, std::string_view value);

/// Parses the flat `key = value` format on top of `base`. `#` starts a comment.
Config parse_config(std::string_view text, Config base = {});
Config load_config_file(const std::string& path, Config base = {});
std::string format_config(const Config& cfg);

/// Config keys in canonical order, as accepted by set_config_value.
const std::vector<std::string>& config_keys();

}  // namespace irs
