#pragma once

// Deterministic synthetic buildings: a grid of rooms with doorways, furniture
// boxes and cylinders, a camera trajectory with depth/mask frames, LiDAR-like
// structural scans and the matching ground truth.

#include "irs/geometry.h"
#include "irs/model.h"
#include "irs/roomseg.h"
#include "irs/semantics.h"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace irs {

enum class ShapeKind : uint8_t { kBox, kCylinder };

/// Built-in object class: footprint (x, y) and height in meters. Cylinders
/// use size.x as the diameter.
struct ObjectClass {
  std::string label;
  ShapeKind shape = ShapeKind::kBox;
  Vec3 size = Vec3::Ones();
  std::string room_type;  // empty for classes that may appear anywhere
};

/// The 20 object classes and 6 room types used by the generator.
const std::vector<ObjectClass>& builtin_object_classes();
const std::vector<std::string>& builtin_room_types();

struct SceneSpec {
  int rooms_x = 2;
  int rooms_y = 2;
  double room_size = 5.0;       // center-to-center spacing of the room grid
  double wall_height = 2.6;
  double wall_thickness = 0.25;
  double door_width = 1.0;
  double door_height = 2.05;    // doorways keep a lintel above this height
  int objects_per_room = 3;
  double noise_sigma = 0.0;     // tangent-space embedding noise (angle scale)
  int frames_per_room = 24;
  int scan_every = 0;           // structural scan period in frames; 0 = once per room visit
  uint64_t seed = 1;
  uint64_t vocab_seed = 7;      // class embeddings, shared across scene seeds
  int dim = 64;
  int image_width = 128;
  int image_height = 96;
  double focal = 96.0;
  double point_spacing = 0.05;  // structural sampling lattice
  double block_size = 10.0;     // side of the scanned square around the robot
  int min_mask_pixels = 40;
  bool windows = true;
  bool cross_room_masks = false;  // masks for objects outside the camera's room
  bool truncated_masks = false;   // masks cut by the left or right image border

  bool operator==(const SceneSpec&) const = default;
};

/// Throws Error naming the offending field.
void validate_spec(const SceneSpec& spec);
/// `key = value` lines; `#` starts a comment.
SceneSpec parse_scene_spec(std::string_view text, SceneSpec base = {});
SceneSpec load_scene_spec(const std::string& path, SceneSpec base = {});
std::string format_scene_spec(const SceneSpec& spec);

struct FrameMask {
  int mask_id = 0;
  std::vector<Pixel> pixels;  // row-major order
  std::array<Embedding, 3> embeddings;
  bool operator==(const FrameMask&) const = default;
};

struct Frame {
  int id = 0;
  Pose pose;
  DepthImage depth;
  std::vector<FrameMask> masks;
  bool has_structs = false;
  std::vector<StructuralPoint> structs;
};

bool operator==(const Frame& a, const Frame& b);

/// Everything the pipeline reads: intrinsics, vocabularies and frames.
struct Sequence {
  CameraIntrinsics intrinsics;
  size_t dim = 0;
  PrototypeSet vocabulary;  // object classes
  PrototypeSet prototypes;  // room types
  std::vector<Frame> frames;
};

struct GtRoom {
  int id = 0;
  std::string label;
  AABB bbox;  // interior box
  bool operator==(const GtRoom&) const = default;
};

struct GtObject {
  int id = 0;
  std::string label;
  int room_id = 0;
  ShapeKind shape = ShapeKind::kBox;
  Vec3 center = Vec3::Zero();  // volumetric center
  Vec3 size = Vec3::Zero();    // as placed (x/y possibly swapped)
  PointCloud points;           // observed surface points, 2 cm deduplicated
  bool operator==(const GtObject&) const = default;
};

struct GroundTruth {
  std::vector<GtRoom> rooms;
  std::vector<GtObject> objects;
  std::map<std::pair<int, int>, int> mask_object;  // (frame, mask) -> object id

  /// Objects that appear in at least one emitted mask.
  std::vector<const GtObject*> observed_objects() const;
  bool operator==(const GroundTruth&) const = default;
};

struct SyntheticScene {
  SceneSpec spec;
  Sequence sequence;
  GroundTruth truth;
  /// Generator world hit points per [frame][mask], aligned with mask pixels.
  std::vector<std::vector<PointCloud>> mask_world_points;
};

/// Throws Error("scene overfull") when objects cannot be placed.
SyntheticScene generate_scene(const SceneSpec& spec);

/// Writes manifest.txt and frame files, plus gt.txt/gt.bin when `truth` is
/// given. Creates `dir` if needed.
void emit_sequence(const Sequence& seq, const GroundTruth* truth, const std::string& dir);
Sequence read_sequence(const std::string& dir);
GroundTruth read_ground_truth(const std::string& dir);

/// Perturbs a unit embedding by isotropic tangent-space Gaussian noise of
/// total scale sigma, then renormalizes.
Embedding perturb_embedding(const Embedding& e, double sigma, std::mt19937_64& rng);

/// Uniformly distributed unit vector.
Embedding random_unit_embedding(size_t dim, std::mt19937_64& rng);

}  // namespace irs
