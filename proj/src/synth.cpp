#include "irs/synth.h"

#include <Eigen/Geometry>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace irs {

namespace fs = std::filesystem;

const std::vector<ObjectClass>& builtin_object_classes() {
  using S = ShapeKind;
  static const std::vector<ObjectClass> classes = {
      {"desk", S::kBox, {1.0, 0.6, 0.75}, "Office"},
      {"office_chair", S::kCylinder, {0.6, 0.6, 0.9}, "Office"},
      {"filing_cabinet", S::kBox, {0.5, 0.6, 1.2}, "Office"},
      {"tv", S::kBox, {0.9, 0.25, 1.1}, "Laboratory"},
      {"workbench", S::kBox, {1.0, 0.7, 0.9}, "Laboratory"},
      {"lab_cabinet", S::kBox, {0.6, 0.5, 1.6}, "Laboratory"},
      {"fridge", S::kBox, {0.7, 0.7, 1.7}, "Kitchen"},
      {"stove", S::kBox, {0.6, 0.6, 0.9}, "Kitchen"},
      {"kitchen_counter", S::kBox, {1.0, 0.6, 0.9}, "Kitchen"},
      {"dining_table", S::kBox, {1.0, 0.9, 0.75}, "Dining room"},
      {"dining_chair", S::kBox, {0.45, 0.45, 0.9}, "Dining room"},
      {"sideboard", S::kBox, {1.0, 0.45, 0.8}, "Dining room"},
      {"bed", S::kBox, {1.0, 1.0, 0.5}, "Bedroom"},
      {"nightstand", S::kBox, {0.45, 0.4, 0.55}, "Bedroom"},
      {"wardrobe", S::kBox, {1.0, 0.6, 1.8}, "Bedroom"},
      {"toilet", S::kBox, {0.4, 0.6, 0.45}, "Bathroom"},
      {"bathtub", S::kBox, {1.0, 0.7, 0.55}, "Bathroom"},
      {"sink", S::kCylinder, {0.5, 0.5, 0.85}, "Bathroom"},
      {"plant", S::kCylinder, {0.5, 0.5, 1.0}, ""},
      {"armchair", S::kBox, {0.8, 0.8, 0.8}, ""},
  };
  return classes;
}

const std::vector<std::string>& builtin_room_types() {
  static const std::vector<std::string> types = {"Office",      "Laboratory", "Kitchen",
                                                 "Dining room", "Bedroom",    "Bathroom"};
  return types;
}

// ---------------------------------------------------------------------------
// Spec

void validate_spec(const SceneSpec& s) {
  auto fail = [](const std::string& m) { throw Error("scene spec: " + m); };
  if (s.rooms_x < 1 || s.rooms_y < 1) fail("rooms_x and rooms_y must be >= 1");
  if (!(s.wall_thickness > 0.0)) fail("wall_thickness must be > 0");
  if (!(s.room_size > s.wall_thickness + 2.5)) fail("room_size too small");
  if (!(s.wall_height > 1.8)) fail("wall_height must be > 1.8");
  const double interior = s.room_size - s.wall_thickness;
  if (!(s.door_width > 0.0) || !(s.door_width < interior - 0.4)) {
    fail("door_width must be in (0, interior length - 0.4)");
  }
  if (!(s.door_height > 1.0) || !(s.door_height < s.wall_height - 0.1)) {
    fail("door_height must be in (1, wall_height - 0.1)");
  }
  if (s.objects_per_room < 0) fail("objects_per_room must be >= 0");
  if (!(s.noise_sigma >= 0.0) || !std::isfinite(s.noise_sigma)) fail("noise_sigma must be >= 0");
  if (s.frames_per_room < 1) fail("frames_per_room must be >= 1");
  if (s.scan_every < 0) fail("scan_every must be >= 0");
  if (s.dim < 8) fail("dim must be >= 8");
  if (s.image_width < 8 || s.image_height < 8) fail("image size must be >= 8");
  if (!(s.focal > 0.0)) fail("focal must be > 0");
  if (!(s.point_spacing > 0.0) || s.point_spacing > 0.1) fail("point_spacing must be in (0, 0.1]");
  if (!(s.block_size > 0.0)) fail("block_size must be > 0");
  if (s.min_mask_pixels < 1) fail("min_mask_pixels must be >= 1");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error("scene spec: " + std::string(key) + ": bad value '" + std::string(v) + "'");
  }
  return out;
}

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

bool parse_flag(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error("scene spec: " + std::string(key) + ": expected true or false");
}

}  // namespace

SceneSpec parse_scene_spec(std::string_view text, SceneSpec s) {
  size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error("scene spec: line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto val = trim(line.substr(eq + 1));
    if (key == "rooms_x") s.rooms_x = parse_number<int>(key, val);
    else if (key == "rooms_y") s.rooms_y = parse_number<int>(key, val);
    else if (key == "room_size") s.room_size = parse_number<double>(key, val);
    else if (key == "wall_height") s.wall_height = parse_number<double>(key, val);
    else if (key == "wall_thickness") s.wall_thickness = parse_number<double>(key, val);
    else if (key == "door_width") s.door_width = parse_number<double>(key, val);
    else if (key == "door_height") s.door_height = parse_number<double>(key, val);
    else if (key == "objects_per_room") s.objects_per_room = parse_number<int>(key, val);
    else if (key == "noise_sigma") s.noise_sigma = parse_number<double>(key, val);
    else if (key == "frames_per_room") s.frames_per_room = parse_number<int>(key, val);
    else if (key == "scan_every") s.scan_every = parse_number<int>(key, val);
    else if (key == "seed") s.seed = parse_number<uint64_t>(key, val);
    else if (key == "vocab_seed") s.vocab_seed = parse_number<uint64_t>(key, val);
    else if (key == "dim") s.dim = parse_number<int>(key, val);
    else if (key == "image_width") s.image_width = parse_number<int>(key, val);
    else if (key == "image_height") s.image_height = parse_number<int>(key, val);
    else if (key == "focal") s.focal = parse_number<double>(key, val);
    else if (key == "point_spacing") s.point_spacing = parse_number<double>(key, val);
    else if (key == "block_size") s.block_size = parse_number<double>(key, val);
    else if (key == "min_mask_pixels") s.min_mask_pixels = parse_number<int>(key, val);
    else if (key == "windows") s.windows = parse_flag(key, val);
    else if (key == "cross_room_masks") s.cross_room_masks = parse_flag(key, val);
    else if (key == "truncated_masks") s.truncated_masks = parse_flag(key, val);
    else {
      throw Error("scene spec: unknown key '" + std::string(key) + "'");
    }
  }
  validate_spec(s);
  return s;
}

SceneSpec load_scene_spec(const std::string& path, SceneSpec base) {
  std::ifstream in(path);
  if (!in) throw Error("scene spec: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene_spec(ss.str(), base);
}

std::string format_scene_spec(const SceneSpec& s) {
  std::ostringstream os;
  os << "rooms_x = " << s.rooms_x << "\nrooms_y = " << s.rooms_y
     << "\nroom_size = " << num(s.room_size) << "\nwall_height = " << num(s.wall_height)
     << "\nwall_thickness = " << num(s.wall_thickness) << "\ndoor_width = " << num(s.door_width)
     << "\ndoor_height = " << num(s.door_height)
     << "\nobjects_per_room = " << s.objects_per_room << "\nnoise_sigma = " << num(s.noise_sigma)
     << "\nframes_per_room = " << s.frames_per_room << "\nscan_every = " << s.scan_every
     << "\nseed = " << s.seed << "\nvocab_seed = " << s.vocab_seed << "\ndim = " << s.dim
     << "\nimage_width = " << s.image_width << "\nimage_height = " << s.image_height
     << "\nfocal = " << num(s.focal) << "\npoint_spacing = " << num(s.point_spacing)
     << "\nblock_size = " << num(s.block_size) << "\nmin_mask_pixels = " << s.min_mask_pixels
     << "\nwindows = " << (s.windows ? "true" : "false")
     << "\ncross_room_masks = " << (s.cross_room_masks ? "true" : "false")
     << "\ntruncated_masks = " << (s.truncated_masks ? "true" : "false") << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Random embeddings

Embedding random_unit_embedding(size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    std::vector<double> v(dim);
    double sq = 0.0;
    for (auto& x : v) {
      x = n(rng);
      sq += x * x;
    }
    if (sq > 1e-12) return Embedding::normalized(std::move(v));
  }
}

Embedding perturb_embedding(const Embedding& e, double sigma, std::mt19937_64& rng) {
  if (sigma <= 0.0) return e;
  const size_t d = e.dim();
  std::normal_distribution<double> n(0.0, sigma / std::sqrt(static_cast<double>(d - 1)));
  std::vector<double> noise(d);
  double along = 0.0;
  for (size_t i = 0; i < d; ++i) {
    noise[i] = n(rng);
    along += noise[i] * e[i];
  }
  std::vector<double> out(d);
  for (size_t i = 0; i < d; ++i) out[i] = e[i] + noise[i] - along * e[i];
  return Embedding::normalized(std::move(out));
}

// ---------------------------------------------------------------------------
// Layout

namespace {

constexpr double kCameraHeight = 1.4;
constexpr double kCameraPitchDeg = 20.0;
constexpr double kCameraOrbit = 0.4;
constexpr double kWallMargin = 0.3;
constexpr double kObjectGap = 0.3;
constexpr double kClearRadius = 1.0;
constexpr double kGtDedupCell = 0.02;
// Window edges are snapped to the middle of this cell so window and wall
// points share boundary voxels at the default voxel size.
constexpr double kWindowCell = 0.1;

struct Rect2 {
  double x0, y0, x1, y1;
};

struct Slab {
  Rect2 r;
};

struct PlacedObject {
  int id;
  size_t cls;
  int room;
  Vec3 center;  // volumetric
  Vec3 size;
  ShapeKind shape;
};

struct Layout {
  std::vector<GtRoom> rooms;
  std::vector<Slab> slabs;    // full-height wall pieces
  std::vector<Slab> lintels;  // wall above each doorway, door_height to ceiling
  std::vector<StructuralPoint> structure;
  std::vector<PlacedObject> objects;
};

std::vector<double> lattice(double a, double b, double step) {
  std::vector<double> out;
  const auto j0 = static_cast<int64_t>(std::ceil((a - 0.5 * step) / step - 1e-9));
  for (int64_t j = j0;; ++j) {
    const double v = 0.5 * step + step * static_cast<double>(j);
    if (v > b + 1e-12) break;
    if (v >= a - 1e-12) out.push_back(v);
  }
  return out;
}

double snap_mid(double v) { return std::floor(v / kWindowCell) * kWindowCell + 0.5 * kWindowCell; }

struct Gap {
  double lo, hi;
};

// A vertical wall face: constant coordinate on `axis` (0 = x, 1 = y), running
// along the other horizontal axis over [a, b], floor to ceiling.
void emit_wall_face(Layout& L, const SceneSpec& s, int axis, double c, double a, double b,
                    std::optional<Gap> door, bool window, uint32_t& next_instance) {
  const uint32_t wall_id = next_instance++;
  const uint32_t window_id = next_instance++;
  const double mid = 0.5 * (a + b);
  const bool has_window = window && s.windows && (b - a) >= 2.5 && s.wall_height >= 2.2;
  const double w0 = snap_mid(mid - 0.6), w1 = snap_mid(mid + 0.6);
  const double z0 = 0.95, z1 = 1.95;
  const auto along = lattice(a, b, s.point_spacing);
  const auto up = lattice(0.0, s.wall_height, s.point_spacing);
  for (double t : along) {
    const bool in_door = door && t > door->lo && t < door->hi;
    for (double z : up) {
      if (in_door && z < s.door_height) continue;
      StructuralPoint sp;
      sp.p = axis == 0 ? Vec3(c, t, z) : Vec3(t, c, z);
      const bool in_window = has_window && t > w0 && t < w1 && z > z0 && z < z1;
      sp.cls = in_window ? StructuralClass::kWindow : StructuralClass::kWall;
      sp.instance = in_window ? window_id : wall_id;
      L.structure.push_back(sp);
    }
  }
}

void emit_horizontal(Layout& L, const SceneSpec& s, StructuralClass cls, double z,
                     const AABB& interior, uint32_t& next_instance) {
  const uint32_t id = next_instance++;
  const auto xs = lattice(interior.min.x(), interior.max.x(), s.point_spacing);
  const auto ys = lattice(interior.min.y(), interior.max.y(), s.point_spacing);
  for (double x : xs) {
    for (double y : ys) L.structure.push_back({Vec3(x, y, z), cls, id});
  }
}

Layout build_layout(const SceneSpec& s) {
  Layout L;
  const double S = s.room_size, t = s.wall_thickness, h = 0.5 * t;
  const double W = s.door_width;
  // Wall slabs with doorway gaps in every shared wall.
  for (int k = 0; k <= s.rooms_x; ++k) {
    const double x = k * S;
    for (int iy = 0; iy < s.rooms_y; ++iy) {
      const double y0 = iy * S - h, y1 = (iy + 1) * S + h, mid = (iy + 0.5) * S;
      if (k == 0 || k == s.rooms_x) {
        L.slabs.push_back({{x - h, y0, x + h, y1}});
      } else {
        L.slabs.push_back({{x - h, y0, x + h, mid - 0.5 * W}});
        L.slabs.push_back({{x - h, mid + 0.5 * W, x + h, y1}});
        L.lintels.push_back({{x - h, mid - 0.5 * W, x + h, mid + 0.5 * W}});
      }
    }
  }
  for (int k = 0; k <= s.rooms_y; ++k) {
    const double y = k * S;
    for (int ix = 0; ix < s.rooms_x; ++ix) {
      const double x0 = ix * S - h, x1 = (ix + 1) * S + h, mid = (ix + 0.5) * S;
      if (k == 0 || k == s.rooms_y) {
        L.slabs.push_back({{x0, y - h, x1, y + h}});
      } else {
        L.slabs.push_back({{x0, y - h, mid - 0.5 * W, y + h}});
        L.slabs.push_back({{mid + 0.5 * W, y - h, x1, y + h}});
        L.lintels.push_back({{mid - 0.5 * W, y - h, mid + 0.5 * W, y + h}});
      }
    }
  }

  uint32_t next_instance = 0;
  for (int iy = 0; iy < s.rooms_y; ++iy) {
    for (int ix = 0; ix < s.rooms_x; ++ix) {
      GtRoom room;
      room.id = iy * s.rooms_x + ix;
      room.bbox.min = Vec3(ix * S + h, iy * S + h, 0.0);
      room.bbox.max = Vec3((ix + 1) * S - h, (iy + 1) * S - h, s.wall_height);
      const AABB& b = room.bbox;
      const double cx = (ix + 0.5) * S, cy = (iy + 0.5) * S;
      const Gap gx{cx - 0.5 * W, cx + 0.5 * W}, gy{cy - 0.5 * W, cy + 0.5 * W};
      emit_wall_face(L, s, 0, b.min.x(), b.min.y(), b.max.y(),
                     ix > 0 ? std::optional<Gap>(gy) : std::nullopt, ix == 0, next_instance);
      emit_wall_face(L, s, 0, b.max.x(), b.min.y(), b.max.y(),
                     ix + 1 < s.rooms_x ? std::optional<Gap>(gy) : std::nullopt,
                     ix + 1 == s.rooms_x, next_instance);
      emit_wall_face(L, s, 1, b.min.y(), b.min.x(), b.max.x(),
                     iy > 0 ? std::optional<Gap>(gx) : std::nullopt, iy == 0, next_instance);
      emit_wall_face(L, s, 1, b.max.y(), b.min.x(), b.max.x(),
                     iy + 1 < s.rooms_y ? std::optional<Gap>(gx) : std::nullopt,
                     iy + 1 == s.rooms_y, next_instance);
      emit_horizontal(L, s, StructuralClass::kFloor, 0.0, b, next_instance);
      emit_horizontal(L, s, StructuralClass::kCeiling, s.wall_height, b, next_instance);
      L.rooms.push_back(room);
    }
  }
  for (auto& sp : L.structure) {
    for (int i = 0; i < 3; ++i) sp.p[i] = static_cast<float>(sp.p[i]);
  }
  return L;
}

void assign_room_types(Layout& L, std::mt19937_64& rng) {
  const auto& types = builtin_room_types();
  const size_t offset = rng() % types.size();
  for (size_t r = 0; r < L.rooms.size(); ++r) L.rooms[r].label = types[(r + offset) % types.size()];
}

std::vector<size_t> room_class_order(const std::string& type, std::mt19937_64& rng) {
  const auto& classes = builtin_object_classes();
  std::vector<size_t> own, generic, other;
  for (size_t i = 0; i < classes.size(); ++i) {
    if (classes[i].room_type == type) own.push_back(i);
    else if (classes[i].room_type.empty()) generic.push_back(i);
    else other.push_back(i);
  }
  std::shuffle(own.begin(), own.end(), rng);
  std::shuffle(generic.begin(), generic.end(), rng);
  std::shuffle(other.begin(), other.end(), rng);
  own.insert(own.end(), generic.begin(), generic.end());
  own.insert(own.end(), other.begin(), other.end());
  return own;
}

void place_objects(Layout& L, const SceneSpec& s, std::mt19937_64& rng) {
  const auto& classes = builtin_object_classes();
  if (static_cast<size_t>(s.objects_per_room) > classes.size()) throw Error("scene overfull");
  int next_id = 0;
  for (const auto& room : L.rooms) {
    const auto order = room_class_order(room.label, rng);
    std::vector<PlacedObject> placed;
    const Vec3 c = room.bbox.center();
    for (int k = 0; k < s.objects_per_room; ++k) {
      const auto& cls = classes[order[static_cast<size_t>(k)]];
      bool ok = false;
      for (int attempt = 0; attempt < 400 && !ok; ++attempt) {
        Vec3 size = cls.size;
        if (cls.shape == ShapeKind::kBox && (rng() & 1)) std::swap(size.x(), size.y());
        const double hx = 0.5 * size.x(), hy = 0.5 * size.y();
        const double lo_x = room.bbox.min.x() + kWallMargin + hx;
        const double hi_x = room.bbox.max.x() - kWallMargin - hx;
        const double lo_y = room.bbox.min.y() + kWallMargin + hy;
        const double hi_y = room.bbox.max.y() - kWallMargin - hy;
        if (hi_x <= lo_x || hi_y <= lo_y) break;
        std::uniform_real_distribution<double> ux(lo_x, hi_x), uy(lo_y, hi_y);
        const Vec3 p(ux(rng), uy(rng), 0.5 * size.z());
        // keep the camera orbit clear
        const double rx = std::max(std::abs(p.x() - c.x()) - hx, 0.0);
        const double ry = std::max(std::abs(p.y() - c.y()) - hy, 0.0);
        if (std::hypot(rx, ry) < kClearRadius) continue;
        bool clear = true;
        for (const auto& o : placed) {
          const double gx = std::abs(p.x() - o.center.x()) - hx - 0.5 * o.size.x();
          const double gy = std::abs(p.y() - o.center.y()) - hy - 0.5 * o.size.y();
          if (gx < kObjectGap && gy < kObjectGap) {
            clear = false;
            break;
          }
        }
        if (!clear) continue;
        placed.push_back({next_id++, order[static_cast<size_t>(k)], room.id, p, size, cls.shape});
        ok = true;
      }
      if (!ok) throw Error("scene overfull");
    }
    L.objects.insert(L.objects.end(), placed.begin(), placed.end());
  }
}

// ---------------------------------------------------------------------------
// Rendering

bool ray_box(const Vec3& o, const Vec3& d, const Vec3& lo, const Vec3& hi, double& t_hit) {
  double t0 = 1e-9, t1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (o[i] < lo[i] || o[i] > hi[i]) return false;
      continue;
    }
    double a = (lo[i] - o[i]) / d[i], b = (hi[i] - o[i]) / d[i];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    if (t0 > t1) return false;
  }
  t_hit = t0;
  return true;
}

bool ray_cylinder(const Vec3& o, const Vec3& d, const Vec3& center, double r, double height,
                  double& t_hit) {
  double best = std::numeric_limits<double>::infinity();
  const double ox = o.x() - center.x(), oy = o.y() - center.y();
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > 1e-15) {
    const double b = 2.0 * (ox * d.x() + oy * d.y());
    const double c = ox * ox + oy * oy - r * r;
    const double disc = b * b - 4 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2 * a), (-b + sq) / (2 * a)}) {
        const double z = o.z() + t * d.z();
        if (t > 1e-9 && z >= 0.0 && z <= height) best = std::min(best, t);
      }
    }
  }
  if (std::abs(d.z()) > 1e-15) {
    for (double zc : {0.0, height}) {
      const double t = (zc - o.z()) / d.z();
      const double x = ox + t * d.x(), y = oy + t * d.y();
      if (t > 1e-9 && x * x + y * y <= r * r) best = std::min(best, t);
    }
  }
  if (!std::isfinite(best)) return false;
  t_hit = best;
  return true;
}

// Segment/rectangle test for LiDAR line of sight. The rectangle is shrunk so
// points lying on a wall face are not hidden by their own wall.
bool segment_hits_rect(double px, double py, double qx, double qy, const Rect2& r) {
  constexpr double eps = 1e-6;
  const double x0 = r.x0 + eps, x1 = r.x1 - eps, y0 = r.y0 + eps, y1 = r.y1 - eps;
  double t0 = 0.0, t1 = 1.0;
  const double dx = qx - px, dy = qy - py;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {px - x0, x1 - px, py - y0, y1 - py};
  for (int i = 0; i < 4; ++i) {
    if (std::abs(p[i]) < 1e-15) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) t0 = std::max(t0, t);
    else t1 = std::min(t1, t);
    if (t0 >= t1) return false;
  }
  return t0 < t1;
}

Pose camera_pose(const Vec3& position, double yaw) {
  const double pitch = kCameraPitchDeg * M_PI / 180.0;
  const Vec3 f(std::cos(yaw) * std::cos(pitch), std::sin(yaw) * std::cos(pitch), -std::sin(pitch));
  const Vec3 r = f.cross(Vec3::UnitZ()).normalized();
  const Vec3 d = f.cross(r);
  Eigen::Matrix3d R;
  R.col(0) = r;
  R.col(1) = d;
  R.col(2) = f;
  return Pose::make(R, position);
}

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  int object = -1;
};

Hit cast(const Layout& L, const SceneSpec& s, const Vec3& o, const Vec3& d) {
  Hit best;
  double t = 0.0;
  if (d.z() < 0.0) best.t = std::min(best.t, -o.z() / d.z());
  if (d.z() > 0.0) best.t = std::min(best.t, (s.wall_height - o.z()) / d.z());
  for (const auto& sl : L.slabs) {
    if (ray_box(o, d, Vec3(sl.r.x0, sl.r.y0, 0.0), Vec3(sl.r.x1, sl.r.y1, s.wall_height), t) &&
        t < best.t) {
      best.t = t;
    }
  }
  for (const auto& sl : L.lintels) {
    if (ray_box(o, d, Vec3(sl.r.x0, sl.r.y0, s.door_height), Vec3(sl.r.x1, sl.r.y1, s.wall_height), t) &&
        t < best.t) {
      best.t = t;
    }
  }
  for (size_t i = 0; i < L.objects.size(); ++i) {
    const auto& ob = L.objects[i];
    bool hit = false;
    if (ob.shape == ShapeKind::kBox) {
      const Vec3 half = 0.5 * ob.size;
      hit = ray_box(o, d, ob.center - half, ob.center + half, t);
    } else {
      hit = ray_cylinder(o, d, Vec3(ob.center.x(), ob.center.y(), 0.0), 0.5 * ob.size.x(),
                         ob.size.z(), t);
    }
    if (hit && t < best.t) {
      best.t = t;
      best.object = static_cast<int>(i);
    }
  }
  return best;
}

std::vector<std::pair<int, int>> room_visit_order(const SceneSpec& s) {
  std::vector<std::pair<int, int>> order;
  for (int iy = 0; iy < s.rooms_y; ++iy) {
    for (int k = 0; k < s.rooms_x; ++k) order.emplace_back(iy % 2 == 0 ? k : s.rooms_x - 1 - k, iy);
  }
  return order;
}

}  // namespace

std::vector<const GtObject*> GroundTruth::observed_objects() const {
  std::vector<const GtObject*> out;
  for (const auto& o : objects) {
    if (!o.points.empty()) out.push_back(&o);
  }
  return out;
}

bool operator==(const Frame& a, const Frame& b) {
  return a.id == b.id && a.pose.rotation == b.pose.rotation &&
         a.pose.translation == b.pose.translation && a.depth == b.depth && a.masks == b.masks &&
         a.has_structs == b.has_structs && a.structs == b.structs;
}

SyntheticScene generate_scene(const SceneSpec& spec) {
  validate_spec(spec);
  SyntheticScene scene;
  scene.spec = spec;
  std::seed_seq layout_seq{spec.seed, uint64_t{1}};
  std::seed_seq noise_seq{spec.seed, uint64_t{2}};
  std::seed_seq vocab_seq{spec.vocab_seed, uint64_t{3}};
  std::mt19937_64 layout_rng(layout_seq), noise_rng(noise_seq), vocab_rng(vocab_seq);

  Layout L = build_layout(spec);
  assign_room_types(L, layout_rng);
  place_objects(L, spec, layout_rng);

  const auto& classes = builtin_object_classes();
  const auto dim = static_cast<size_t>(spec.dim);
  std::vector<PrototypeSet::Entry> vocab;
  for (const auto& c : classes) vocab.push_back({c.label, random_unit_embedding(dim, vocab_rng)});
  std::vector<PrototypeSet::Entry> protos;
  for (const auto& type : builtin_room_types()) {
    std::vector<double> sum(dim, 0.0);
    for (size_t i = 0; i < classes.size(); ++i) {
      if (classes[i].room_type != type) continue;
      const double vol = classes[i].size.prod();
      for (size_t k = 0; k < dim; ++k) sum[k] += vol * vocab[i].embedding[k];
    }
    protos.push_back({type, Embedding::normalized(std::move(sum))});
  }

  Sequence& seq = scene.sequence;
  seq.dim = dim;
  seq.intrinsics = {spec.focal, spec.focal, 0.5 * spec.image_width, 0.5 * spec.image_height,
                    spec.image_width, spec.image_height};
  seq.vocabulary = PrototypeSet(std::move(vocab));
  seq.prototypes = PrototypeSet(std::move(protos));

  GroundTruth& gt = scene.truth;
  gt.rooms = L.rooms;
  for (const auto& ob : L.objects) {
    GtObject g;
    g.id = ob.id;
    g.label = classes[ob.cls].label;
    g.room_id = ob.room;
    g.shape = ob.shape;
    g.center = ob.center;
    g.size = ob.size;
    gt.objects.push_back(std::move(g));
  }
  std::vector<std::set<VoxelKey>> gt_cells(L.objects.size());

  std::vector<Vec3> structure_xyz;
  structure_xyz.reserve(L.structure.size());
  for (const auto& sp : L.structure) structure_xyz.push_back(sp.p);
  const PlanarGridIndex structure_index(structure_xyz, 1.0);

  const auto& intr = seq.intrinsics;
  const double cam_z = std::min(kCameraHeight, spec.wall_height - 0.3);
  int frame_id = 0;
  for (const auto& [ix, iy] : room_visit_order(spec)) {
    const Vec3 c((ix + 0.5) * spec.room_size, (iy + 0.5) * spec.room_size, cam_z);
    for (int f = 0; f < spec.frames_per_room; ++f, ++frame_id) {
      const double phi = 2.0 * M_PI * f / spec.frames_per_room;
      Frame frame;
      frame.id = frame_id;
      frame.pose = camera_pose(c + kCameraOrbit * Vec3(std::cos(phi), std::sin(phi), 0.0), phi);
      frame.depth = DepthImage(intr.width, intr.height);
      std::vector<std::vector<Pixel>> obj_pixels(L.objects.size());
      std::vector<PointCloud> obj_points(L.objects.size());
      for (int v = 0; v < intr.height; ++v) {
        for (int u = 0; u < intr.width; ++u) {
          const Vec3 ray_cam((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
          const Vec3 d = frame.pose.rotation * ray_cam;
          const Hit hit = cast(L, spec, frame.pose.translation, d);
          if (!std::isfinite(hit.t)) continue;
          frame.depth.at(u, v) = static_cast<float>(hit.t);
          if (hit.object >= 0) {
            obj_pixels[hit.object].push_back({u, v});
            obj_points[hit.object].push_back(frame.pose.translation + hit.t * d);
          }
        }
      }
      const int camera_room = iy * spec.rooms_x + ix;
      std::vector<PointCloud> world;
      for (size_t o = 0; o < L.objects.size(); ++o) {
        if (static_cast<int>(obj_pixels[o].size()) < spec.min_mask_pixels) continue;
        if (!spec.cross_room_masks && L.objects[o].room != camera_room) continue;
        if (!spec.truncated_masks &&
            std::any_of(obj_pixels[o].begin(), obj_pixels[o].end(), [&](const Pixel& px) {
              return px.u == 0 || px.u == intr.width - 1;
            })) {
          continue;
        }
        FrameMask m;
        m.mask_id = static_cast<int>(frame.masks.size());
        m.pixels = std::move(obj_pixels[o]);
        const Embedding& base = seq.vocabulary.entries()[L.objects[o].cls].embedding;
        for (auto& e : m.embeddings) e = perturb_embedding(base, spec.noise_sigma, noise_rng);
        gt.mask_object[{frame.id, m.mask_id}] = L.objects[o].id;
        for (const auto& p : obj_points[o]) {
          if (gt_cells[o].insert(voxel_key(p, kGtDedupCell)).second) {
            gt.objects[o].points.emplace_back(static_cast<float>(p.x()), static_cast<float>(p.y()),
                                              static_cast<float>(p.z()));
          }
        }
        world.push_back(std::move(obj_points[o]));
        frame.masks.push_back(std::move(m));
      }
      scene.mask_world_points.push_back(std::move(world));

      frame.has_structs = spec.scan_every == 0 ? f == 0 : frame_id % spec.scan_every == 0;
      if (frame.has_structs) {
        const Vec3 robot = frame.pose.translation;
        for (size_t idx : structure_index.query_box(robot, 0.5 * spec.block_size)) {
          const auto& sp = L.structure[idx];
          bool visible = true;
          for (const auto& sl : L.slabs) {
            if (segment_hits_rect(robot.x(), robot.y(), sp.p.x(), sp.p.y(), sl.r)) {
              visible = false;
              break;
            }
          }
          if (visible) frame.structs.push_back(sp);
        }
      }
      seq.frames.push_back(std::move(frame));
    }
  }
  return scene;
}

// ---------------------------------------------------------------------------
// Sequence files

namespace {

std::string frame_path(const std::string& dir, int id, const char* ext) {
  char name[64];
  std::snprintf(name, sizeof name, "frame_%06d.%s", id, ext);
  return (fs::path(dir) / name).string();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("write failed for '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f32(std::string& out, float f) {
  uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}
uint32_t get_u32(const std::string& s, size_t off) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(s[off + i])) << (8 * i);
  return v;
}
float get_f32(const std::string& s, size_t off) {
  const uint32_t bits = get_u32(s, off);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

void put_reals(std::ostream& os, const std::vector<double>& v) {
  for (size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << num(v[i]);
}

// Whitespace tokenizer over a text file with file/line context for errors.
class TextReader {
 public:
  TextReader(std::string text, std::string name) : text_(std::move(text)), name_(std::move(name)) {}

  bool next_line() {
    if (pos_ >= text_.size()) return false;
    const auto nl = text_.find('\n', pos_);
    const auto end = nl == std::string::npos ? text_.size() : nl;
    line_ = std::string_view(text_).substr(pos_, end - pos_);
    pos_ = end + 1;
    ++line_no_;
    cursor_ = 0;
    return true;
  }
  void require_line() {
    if (!next_line()) fail("unexpected end of file");
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(name_ + ":" + std::to_string(line_no_) + ": " + msg);
  }
  std::string_view word() {
    while (cursor_ < line_.size() && line_[cursor_] == ' ') ++cursor_;
    if (cursor_ >= line_.size()) fail("missing field");
    const auto end = std::min(line_.find(' ', cursor_), line_.size());
    const auto w = line_.substr(cursor_, end - cursor_);
    cursor_ = end;
    return w;
  }
  void keyword(std::string_view kw) {
    const auto w = word();
    if (w != kw) fail("expected '" + std::string(kw) + "', found '" + std::string(w) + "'");
  }
  template <typename T>
  T number() {
    const auto w = word();
    T v{};
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || ptr != w.data() + w.size()) fail("bad number '" + std::string(w) + "'");
    return v;
  }
  std::vector<double> reals(size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = number<double>();
    return v;
  }
  std::string rest() {
    while (cursor_ < line_.size() && line_[cursor_] == ' ') ++cursor_;
    std::string r(line_.substr(cursor_));
    cursor_ = line_.size();
    if (r.empty()) fail("missing field");
    return r;
  }
  std::string_view line() const { return line_; }

 private:
  std::string text_;
  std::string name_;
  size_t pos_ = 0;
  size_t line_no_ = 0;
  std::string_view line_;
  size_t cursor_ = 0;
};

void write_labelled(std::ostream& os, const char* kw, const PrototypeSet& set) {
  for (const auto& e : set.entries()) {
    os << kw << ' ';
    put_reals(os, e.embedding.values());
    os << ' ' << e.label << '\n';
  }
}

PrototypeSet::Entry read_labelled(TextReader& in, size_t dim) {
  auto v = in.reals(dim);
  std::string label = in.rest();
  try {
    return {std::move(label), Embedding::from_unit(std::move(v))};
  } catch (const Error& e) {
    in.fail(e.what());
  }
}

}  // namespace

void emit_sequence(const Sequence& seq, const GroundTruth* truth, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + dir + "': " + ec.message());

  std::ostringstream m;
  const auto& in = seq.intrinsics;
  m << "IRSEQ v1\n"
    << "width " << in.width << "\nheight " << in.height << "\nfx " << num(in.fx) << "\nfy "
    << num(in.fy) << "\ncx " << num(in.cx) << "\ncy " << num(in.cy) << "\ndim " << seq.dim
    << "\nframes " << seq.frames.size() << "\nclasses " << seq.vocabulary.size() << '\n';
  write_labelled(m, "class", seq.vocabulary);
  m << "prototypes " << seq.prototypes.size() << '\n';
  write_labelled(m, "prototype", seq.prototypes);
  write_file((fs::path(dir) / "manifest.txt").string(), m.str());

  for (size_t i = 0; i < seq.frames.size(); ++i) {
    const Frame& f = seq.frames[i];
    if (f.id != static_cast<int>(i)) throw Error("emit_sequence: frame ids must be 0..n-1");
    std::ostringstream p;
    for (int r = 0; r < 3; ++r) {
      p << num(f.pose.rotation(r, 0)) << ' ' << num(f.pose.rotation(r, 1)) << ' '
        << num(f.pose.rotation(r, 2)) << ' ' << num(f.pose.translation[r]) << '\n';
    }
    write_file(frame_path(dir, f.id, "pose"), p.str());

    std::string depth;
    depth.reserve(f.depth.data.size() * 4);
    for (float d : f.depth.data) put_f32(depth, d);
    write_file(frame_path(dir, f.id, "depth"), depth);

    std::ostringstream ms;
    ms << "masks " << f.masks.size() << '\n';
    for (const auto& mask : f.masks) {
      // row runs: v u0 length
      std::vector<std::array<int, 3>> runs;
      for (const auto& px : mask.pixels) {
        if (!runs.empty() && runs.back()[0] == px.v && runs.back()[1] + runs.back()[2] == px.u) {
          ++runs.back()[2];
        } else {
          runs.push_back({px.v, px.u, 1});
        }
      }
      ms << "mask " << mask.mask_id << " runs " << runs.size();
      for (const auto& r : runs) ms << ' ' << r[0] << ' ' << r[1] << ' ' << r[2];
      ms << '\n';
      for (const auto& e : mask.embeddings) {
        put_reals(ms, e.values());
        ms << '\n';
      }
    }
    write_file(frame_path(dir, f.id, "masks"), ms.str());

    const auto structs_path = frame_path(dir, f.id, "structs");
    if (f.has_structs) {
      std::string b = "IRST";
      put_u32(b, static_cast<uint32_t>(f.structs.size()));
      for (const auto& sp : f.structs) {
        for (int k = 0; k < 3; ++k) put_f32(b, static_cast<float>(sp.p[k]));
        put_u32(b, static_cast<uint32_t>(sp.cls));
        put_u32(b, sp.instance);
      }
      write_file(structs_path, b);
    } else {
      fs::remove(structs_path, ec);
    }
  }

  const auto gt_txt = (fs::path(dir) / "gt.txt").string();
  const auto gt_bin = (fs::path(dir) / "gt.bin").string();
  if (!truth) {
    fs::remove(gt_txt, ec);
    fs::remove(gt_bin, ec);
    return;
  }
  std::ostringstream g;
  g << "IRGT v1\nrooms " << truth->rooms.size() << '\n';
  for (const auto& r : truth->rooms) {
    g << "room " << r.id;
    for (int k = 0; k < 3; ++k) g << ' ' << num(r.bbox.min[k]);
    for (int k = 0; k < 3; ++k) g << ' ' << num(r.bbox.max[k]);
    g << ' ' << r.label << '\n';
  }
  g << "objects " << truth->objects.size() << '\n';
  for (const auto& o : truth->objects) {
    g << "object " << o.id << ' ' << o.room_id << ' '
      << (o.shape == ShapeKind::kBox ? "box" : "cylinder");
    for (int k = 0; k < 3; ++k) g << ' ' << num(o.center[k]);
    for (int k = 0; k < 3; ++k) g << ' ' << num(o.size[k]);
    g << ' ' << o.label << '\n';
  }
  g << "masks " << truth->mask_object.size() << '\n';
  for (const auto& [key, obj] : truth->mask_object) {
    g << "mask " << key.first << ' ' << key.second << ' ' << obj << '\n';
  }
  write_file(gt_txt, g.str());

  std::string b = "IRGB";
  put_u32(b, 1);
  put_u32(b, static_cast<uint32_t>(truth->objects.size()));
  for (const auto& o : truth->objects) {
    put_u32(b, static_cast<uint32_t>(o.id));
    put_u32(b, static_cast<uint32_t>(o.points.size()));
    for (const auto& p : o.points) {
      for (int k = 0; k < 3; ++k) put_f32(b, static_cast<float>(p[k]));
    }
  }
  write_file(gt_bin, b);
}

Sequence read_sequence(const std::string& dir) {
  const auto manifest_path = (fs::path(dir) / "manifest.txt").string();
  if (!fs::exists(manifest_path)) throw Error("missing manifest: " + manifest_path);
  TextReader in(read_file(manifest_path), "manifest.txt");
  Sequence seq;
  in.require_line();
  in.keyword("IRSEQ");
  if (in.word() != "v1") in.fail("unsupported version");
  auto field = [&](std::string_view kw) {
    in.require_line();
    in.keyword(kw);
  };
  field("width");
  seq.intrinsics.width = in.number<int>();
  field("height");
  seq.intrinsics.height = in.number<int>();
  field("fx");
  seq.intrinsics.fx = in.number<double>();
  field("fy");
  seq.intrinsics.fy = in.number<double>();
  field("cx");
  seq.intrinsics.cx = in.number<double>();
  field("cy");
  seq.intrinsics.cy = in.number<double>();
  try {
    seq.intrinsics.validate();
  } catch (const Error& e) {
    in.fail(e.what());
  }
  field("dim");
  seq.dim = in.number<size_t>();
  if (seq.dim == 0) in.fail("dim must be > 0");
  field("frames");
  const auto n_frames = in.number<size_t>();
  field("classes");
  const auto n_classes = in.number<size_t>();
  std::vector<PrototypeSet::Entry> vocab;
  for (size_t i = 0; i < n_classes; ++i) {
    field("class");
    vocab.push_back(read_labelled(in, seq.dim));
  }
  field("prototypes");
  const auto n_protos = in.number<size_t>();
  std::vector<PrototypeSet::Entry> protos;
  for (size_t i = 0; i < n_protos; ++i) {
    field("prototype");
    protos.push_back(read_labelled(in, seq.dim));
  }
  try {
    seq.vocabulary = PrototypeSet(std::move(vocab));
    seq.prototypes = PrototypeSet(std::move(protos));
  } catch (const Error& e) {
    in.fail(e.what());
  }

  const auto& intr = seq.intrinsics;
  for (size_t i = 0; i < n_frames; ++i) {
    Frame f;
    f.id = static_cast<int>(i);
    {
      const auto path = frame_path(dir, f.id, "pose");
      TextReader p(read_file(path), fs::path(path).filename().string());
      Eigen::Matrix3d R;
      Vec3 t;
      for (int r = 0; r < 3; ++r) {
        p.require_line();
        for (int c = 0; c < 3; ++c) R(r, c) = p.number<double>();
        t[r] = p.number<double>();
      }
      try {
        f.pose = Pose::make(R, t);
      } catch (const Error& e) {
        p.fail(e.what());
      }
    }
    {
      const auto path = frame_path(dir, f.id, "depth");
      const auto raw = read_file(path);
      const size_t n = static_cast<size_t>(intr.width) * intr.height;
      if (raw.size() != n * 4) {
        throw Error(fs::path(path).filename().string() + ": expected " + std::to_string(n * 4) +
                    " bytes, found " + std::to_string(raw.size()));
      }
      f.depth = DepthImage(intr.width, intr.height);
      for (size_t k = 0; k < n; ++k) f.depth.data[k] = get_f32(raw, 4 * k);
    }
    {
      const auto path = frame_path(dir, f.id, "masks");
      TextReader ms(read_file(path), fs::path(path).filename().string());
      ms.require_line();
      ms.keyword("masks");
      const auto n_masks = ms.number<size_t>();
      for (size_t k = 0; k < n_masks; ++k) {
        FrameMask mask;
        ms.require_line();
        ms.keyword("mask");
        mask.mask_id = ms.number<int>();
        ms.keyword("runs");
        const auto n_runs = ms.number<size_t>();
        for (size_t r = 0; r < n_runs; ++r) {
          const int v = ms.number<int>(), u0 = ms.number<int>(), len = ms.number<int>();
          if (v < 0 || v >= intr.height || u0 < 0 || len < 1 || u0 + len > intr.width) {
            ms.fail("pixel run outside the image");
          }
          for (int u = u0; u < u0 + len; ++u) mask.pixels.push_back({u, v});
        }
        for (auto& e : mask.embeddings) {
          ms.require_line();
          try {
            e = Embedding::from_unit(ms.reals(seq.dim));
          } catch (const Error& err) {
            ms.fail(err.what());
          }
        }
        f.masks.push_back(std::move(mask));
      }
    }
    const auto structs_path = frame_path(dir, f.id, "structs");
    if (fs::exists(structs_path)) {
      const auto raw = read_file(structs_path);
      const auto name = fs::path(structs_path).filename().string();
      if (raw.size() < 8 || raw.compare(0, 4, "IRST") != 0) throw Error(name + ": bad header");
      const uint32_t n = get_u32(raw, 4);
      if (raw.size() != 8 + static_cast<size_t>(n) * 20) throw Error(name + ": truncated");
      f.has_structs = true;
      f.structs.reserve(n);
      for (uint32_t k = 0; k < n; ++k) {
        const size_t off = 8 + static_cast<size_t>(k) * 20;
        StructuralPoint sp;
        sp.p = Vec3(get_f32(raw, off), get_f32(raw, off + 4), get_f32(raw, off + 8));
        const auto cls = structural_class_from_id(get_u32(raw, off + 12));
        if (!cls) throw Error(name + ": unknown structural class at point " + std::to_string(k));
        sp.cls = *cls;
        sp.instance = get_u32(raw, off + 16);
        f.structs.push_back(sp);
      }
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

GroundTruth read_ground_truth(const std::string& dir) {
  const auto txt_path = (fs::path(dir) / "gt.txt").string();
  const auto bin_path = (fs::path(dir) / "gt.bin").string();
  TextReader in(read_file(txt_path), "gt.txt");
  GroundTruth gt;
  in.require_line();
  in.keyword("IRGT");
  if (in.word() != "v1") in.fail("unsupported version");
  in.require_line();
  in.keyword("rooms");
  const auto n_rooms = in.number<size_t>();
  for (size_t i = 0; i < n_rooms; ++i) {
    in.require_line();
    in.keyword("room");
    GtRoom r;
    r.id = in.number<int>();
    for (int k = 0; k < 3; ++k) r.bbox.min[k] = in.number<double>();
    for (int k = 0; k < 3; ++k) r.bbox.max[k] = in.number<double>();
    r.label = in.rest();
    gt.rooms.push_back(std::move(r));
  }
  in.require_line();
  in.keyword("objects");
  const auto n_obj = in.number<size_t>();
  for (size_t i = 0; i < n_obj; ++i) {
    in.require_line();
    in.keyword("object");
    GtObject o;
    o.id = in.number<int>();
    o.room_id = in.number<int>();
    const auto shape = in.word();
    if (shape == "box") o.shape = ShapeKind::kBox;
    else if (shape == "cylinder") o.shape = ShapeKind::kCylinder;
    else in.fail("unknown shape '" + std::string(shape) + "'");
    for (int k = 0; k < 3; ++k) o.center[k] = in.number<double>();
    for (int k = 0; k < 3; ++k) o.size[k] = in.number<double>();
    o.label = in.rest();
    gt.objects.push_back(std::move(o));
  }
  in.require_line();
  in.keyword("masks");
  const auto n_masks = in.number<size_t>();
  for (size_t i = 0; i < n_masks; ++i) {
    in.require_line();
    in.keyword("mask");
    const int frame = in.number<int>(), mask = in.number<int>(), obj = in.number<int>();
    gt.mask_object[{frame, mask}] = obj;
  }

  const auto raw = read_file(bin_path);
  if (raw.size() < 12 || raw.compare(0, 4, "IRGB") != 0) throw Error("gt.bin: bad header");
  if (get_u32(raw, 4) != 1) throw Error("gt.bin: unsupported version");
  if (get_u32(raw, 8) != gt.objects.size()) throw Error("gt.bin: object count differs from gt.txt");
  size_t off = 12;
  for (auto& o : gt.objects) {
    if (off + 8 > raw.size()) throw Error("gt.bin: truncated at byte " + std::to_string(off));
    if (static_cast<int>(get_u32(raw, off)) != o.id) {
      throw Error("gt.bin: object id mismatch at byte " + std::to_string(off));
    }
    const uint32_t n = get_u32(raw, off + 4);
    off += 8;
    if (off + static_cast<size_t>(n) * 12 > raw.size()) {
      throw Error("gt.bin: truncated at byte " + std::to_string(off));
    }
    for (uint32_t k = 0; k < n; ++k, off += 12) {
      o.points.emplace_back(get_f32(raw, off), get_f32(raw, off + 4), get_f32(raw, off + 8));
    }
  }
  if (off != raw.size()) throw Error("gt.bin: trailing data at byte " + std::to_string(off));
  return gt;
}

}  // namespace irs
