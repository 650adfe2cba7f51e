#include "irs/model.h"

#include <Eigen/LU>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace irs {

Pose Pose::make(const Eigen::Matrix3d& rotation, const Vec3& translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw Error("pose: non-finite entries");
  }
  const double ortho_err =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-6 || std::abs(rotation.determinant() - 1.0) > 1e-6) {
    throw Error("pose: rotation is not a proper orthonormal matrix");
  }
  return Pose{rotation, translation};
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error("intrinsics: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw Error("intrinsics: image size must be positive");
  if (!(cx >= 0.0 && cx < width)) throw Error("intrinsics: cx outside image");
  if (!(cy >= 0.0 && cy < height)) throw Error("intrinsics: cy outside image");
}

Embedding Embedding::normalized(std::vector<double> values) {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error("embedding: cannot normalize a zero or non-finite vector");
  }
  for (double& v : values) v /= norm;
  Embedding e;
  e.values_ = std::move(values);
  return e;
}

Embedding Embedding::from_unit(std::vector<double> values) {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  if (!std::isfinite(sq) || std::abs(std::sqrt(sq) - 1.0) > 1e-6) {
    throw Error("embedding: vector is not unit-norm");
  }
  Embedding e;
  e.values_ = std::move(values);
  return e;
}

std::string_view to_string(StructuralClass cls) {
  switch (cls) {
    case StructuralClass::kWall: return "wall";
    case StructuralClass::kDoor: return "door";
    case StructuralClass::kWindow: return "window";
    case StructuralClass::kCeiling: return "ceiling";
    case StructuralClass::kFloor: return "floor";
  }
  return "unknown";
}

std::optional<StructuralClass> structural_class_from_id(uint32_t id) {
  if (id > static_cast<uint32_t>(StructuralClass::kFloor)) return std::nullopt;
  return static_cast<StructuralClass>(id);
}

std::optional<StructuralClass> parse_structural_class(std::string_view name) {
  for (uint32_t id = 0; id <= 4; ++id) {
    auto cls = static_cast<StructuralClass>(id);
    if (to_string(cls) == name) return cls;
  }
  return std::nullopt;
}

Vec3 MaskObservation::centroid() const {
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points) sum += p;
  return points.empty() ? sum : Vec3(sum / static_cast<double>(points.size()));
}

Vec3 Instance::centroid() const {
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points) sum += p;
  return points.empty() ? sum : Vec3(sum / static_cast<double>(points.size()));
}

const Room* SceneGraph::find_room(int id) const {
  for (const auto& r : rooms) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

const Instance* SceneGraph::find_instance(int id) const {
  for (const auto& inst : instances) {
    if (inst.id == id) return &inst;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Config

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw Error("config: " + std::string(key) + ": expected a real number, got '" +
                std::string(value) + "'");
  }
  return out;
}

int parse_int(std::string_view key, std::string_view value) {
  int out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error("config: " + std::string(key) + ": expected an integer, got '" +
                std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw Error("config: " + std::string(key) + ": expected a boolean, got '" +
              std::string(value) + "'");
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Config validate_config(const Config& cfg) {
  auto fail = [](const std::string& msg) { throw Error("config: " + msg); };
  if (!(cfg.block_size > 0.0)) fail("block_size must be > 0");
  if (!in_unit(cfg.tau_wall_overlap)) fail("tau1 must be in [0,1]");
  if (!in_unit(cfg.tau_wall_normal)) fail("tau2 must be in [0,1]");
  if (!(cfg.tau_height > 0.0)) fail("tau3 must be > 0");
  if (!in_unit(cfg.tau_geometric)) fail("tau_g must be in [0,1]");
  if (!in_unit(cfg.tau_semantic)) fail("tau_s must be in [0,1]");
  for (int i = 0; i < 3; ++i) {
    if (!(cfg.alpha[i] >= 0.0)) fail("alpha" + std::to_string(i + 1) + " must be >= 0");
  }
  if (std::abs(cfg.alpha[0] + cfg.alpha[1] + cfg.alpha[2] - 1.0) > 1e-9) {
    fail("alpha weights must sum to 1");
  }
  if (!(cfg.voxel_size > 0.0)) fail("voxel_size must be > 0");
  if (!(cfg.dbscan_eps > 0.0)) fail("dbscan_eps must be > 0");
  if (cfg.dbscan_min_pts < 1) fail("dbscan_min_pts must be >= 1");
  if (cfg.min_mask_points < 1) fail("min_mask_points must be >= 1");
  if (cfg.workers < 1) fail("workers must be >= 1");
  return cfg;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "block_size", "tau1",       "tau2",           "tau3",
      "tau_g",      "tau_s",      "alpha1",         "alpha2",
      "alpha3",     "voxel_size", "dbscan_eps",     "dbscan_min_pts",
      "min_mask_points", "workers", "corner_rule"};
  return keys;
}

void set_config_value(Config& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "block_size") cfg.block_size = parse_double(key, value);
  else if (key == "tau1") cfg.tau_wall_overlap = parse_double(key, value);
  else if (key == "tau2") cfg.tau_wall_normal = parse_double(key, value);
  else if (key == "tau3") cfg.tau_height = parse_double(key, value);
  else if (key == "tau_g") cfg.tau_geometric = parse_double(key, value);
  else if (key == "tau_s") cfg.tau_semantic = parse_double(key, value);
  else if (key == "alpha1") cfg.alpha[0] = parse_double(key, value);
  else if (key == "alpha2") cfg.alpha[1] = parse_double(key, value);
  else if (key == "alpha3") cfg.alpha[2] = parse_double(key, value);
  else if (key == "voxel_size") cfg.voxel_size = parse_double(key, value);
  else if (key == "dbscan_eps") cfg.dbscan_eps = parse_double(key, value);
  else if (key == "dbscan_min_pts") cfg.dbscan_min_pts = parse_int(key, value);
  else if (key == "min_mask_points") cfg.min_mask_points = parse_int(key, value);
  else if (key == "workers") cfg.workers = parse_int(key, value);
  else if (key == "corner_rule") cfg.corner_rule = parse_bool(key, value);
  else throw Error("config: unknown key '" + std::string(key) + "'");
}

Config parse_config(std::string_view text, Config base) {
  size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error("config: line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    set_config_value(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

Config load_config_file(const std::string& path, Config base) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

std::string format_config(const Config& cfg) {
  std::ostringstream os;
  os << "block_size = " << fmt_double(cfg.block_size) << "\n"
     << "tau1 = " << fmt_double(cfg.tau_wall_overlap) << "\n"
     << "tau2 = " << fmt_double(cfg.tau_wall_normal) << "\n"
     << "tau3 = " << fmt_double(cfg.tau_height) << "\n"
     << "tau_g = " << fmt_double(cfg.tau_geometric) << "\n"
     << "tau_s = " << fmt_double(cfg.tau_semantic) << "\n"
     << "alpha1 = " << fmt_double(cfg.alpha[0]) << "\n"
     << "alpha2 = " << fmt_double(cfg.alpha[1]) << "\n"
     << "alpha3 = " << fmt_double(cfg.alpha[2]) << "\n"
     << "voxel_size = " << fmt_double(cfg.voxel_size) << "\n"
     << "dbscan_eps = " << fmt_double(cfg.dbscan_eps) << "\n"
     << "dbscan_min_pts = " << cfg.dbscan_min_pts << "\n"
     << "min_mask_points = " << cfg.min_mask_points << "\n"
     << "workers = " << cfg.workers << "\n"
     << "corner_rule = " << (cfg.corner_rule ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace irs
