#include "irs/graph.h"

#include "irs/geometry.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace irs {

namespace {

PointCloud to_float_precision(PointCloud pts) {
  for (auto& p : pts) {
    for (int i = 0; i < 3; ++i) p[i] = static_cast<double>(static_cast<float>(p[i]));
  }
  return pts;
}

int attach_room(const Instance& inst, const std::vector<Room>& rooms, const RoomSet& set,
                GraphBuildReport* report) {
  auto fusion_room_valid = [&] {
    return std::any_of(rooms.begin(), rooms.end(),
                       [&](const Room& r) { return r.id == inst.room_id; });
  };
  if (inst.bbox.empty()) {
    if (report) {
      report->warnings.push_back("instance " + std::to_string(inst.id) +
                                 " has an empty bbox; attached by fusion room");
    }
    if (fusion_room_valid()) return inst.room_id;
    return rooms.front().id;
  }
  int best = -1;
  double best_area = 0.0;
  for (const auto& r : rooms) {
    const double a = r.bbox.xy_overlap_area(inst.bbox);
    if (a > best_area) {
      best_area = a;
      best = r.id;
    }
  }
  if (best >= 0) return best;
  if (fusion_room_valid()) return inst.room_id;
  return set.rooms[static_cast<size_t>(assign_room(inst.centroid(), set))].id;
}

}  // namespace

SceneGraph build_graph(RoomSet rooms, std::vector<Instance> instances,
                       const PrototypeSet& prototypes, double voxel_size,
                       GraphBuildReport* report) {
  if (!(voxel_size > 0.0)) throw Error("build_graph: voxel_size must be > 0");
  SceneGraph g;
  g.voxel_size = voxel_size;
  g.embedding_dim = prototypes.dim();
  if (!instances.empty()) g.embedding_dim = instances.front().embedding.dim();

  std::sort(rooms.rooms.begin(), rooms.rooms.end(),
            [](const Room& a, const Room& b) { return a.id < b.id; });
  for (auto& r : rooms.rooms) {
    for (auto& s : r.wall_segments) s.points = to_float_precision(std::move(s.points));
    for (auto& s : r.horizontal_segments) s.points = to_float_precision(std::move(s.points));
    r.label.reset();
    r.feature.reset();
  }

  std::sort(instances.begin(), instances.end(),
            [](const Instance& a, const Instance& b) { return a.id < b.id; });
  for (auto& inst : instances) {
    if (inst.embedding.dim() != g.embedding_dim) {
      throw Error("build_graph: instance " + std::to_string(inst.id) +
                  " embedding dimension differs");
    }
    inst.points = to_float_precision(std::move(inst.points));
    inst.voxels = voxelize(inst.points, voxel_size);
    inst.bbox = inst.points.empty() ? AABB{} : compute_aabb(inst.points);
  }

  if (!instances.empty() && rooms.rooms.empty()) {
    throw Error("build_graph: instances present but no rooms segmented");
  }
  for (auto& inst : instances) {
    inst.room_id = attach_room(inst, rooms.rooms, rooms, report);
  }

  for (auto& r : rooms.rooms) {
    std::vector<const Instance*> members;
    for (const auto& inst : instances) {
      if (inst.room_id == r.id) members.push_back(&inst);
    }
    if (members.empty() || prototypes.empty()) {
      r.label = kUnknownRoomLabel;
      if (!members.empty()) r.feature = aggregate_room_feature(members);
      continue;
    }
    r.feature = aggregate_room_feature(members);
    r.label = classify_room(*r.feature, prototypes);
  }

  for (const auto& r : rooms.rooms) {
    g.edges.push_back({BelongsToEdge::Kind::kRoomToBuilding, r.id, g.building.id});
  }
  for (const auto& inst : instances) {
    g.edges.push_back({BelongsToEdge::Kind::kInstanceToRoom, inst.id, inst.room_id});
  }
  g.rooms = std::move(rooms.rooms);
  g.instances = std::move(instances);
  return g;
}

std::vector<std::string> validate(const SceneGraph& g) {
  std::vector<std::string> out;
  std::map<int, int> room_seen;
  for (const auto& r : g.rooms) {
    if (++room_seen[r.id] == 2) out.push_back("room " + std::to_string(r.id) + " id is duplicated");
  }
  std::map<int, int> inst_seen;
  for (const auto& inst : g.instances) {
    if (++inst_seen[inst.id] == 2) {
      out.push_back("instance " + std::to_string(inst.id) + " id is duplicated");
    }
  }

  std::map<int, std::vector<int>> inst_parents;
  std::map<int, int> room_edges;
  for (const auto& e : g.edges) {
    if (e.kind == BelongsToEdge::Kind::kInstanceToRoom) {
      const std::string name =
          "edge instance " + std::to_string(e.child) + " -> room " + std::to_string(e.parent);
      if (!inst_seen.count(e.child)) out.push_back(name + ": dangling instance");
      if (!room_seen.count(e.parent)) out.push_back(name + ": dangling room");
      inst_parents[e.child].push_back(e.parent);
    } else {
      const std::string name =
          "edge room " + std::to_string(e.child) + " -> building " + std::to_string(e.parent);
      if (!room_seen.count(e.child)) out.push_back(name + ": dangling room");
      if (e.parent != g.building.id) out.push_back(name + ": dangling building");
      ++room_edges[e.child];
    }
  }

  for (const auto& r : g.rooms) {
    const int n = room_edges[r.id];
    if (n != 1) {
      out.push_back("room " + std::to_string(r.id) + " has " + std::to_string(n) +
                    " building edges");
    }
    if (r.feature && std::abs(std::sqrt(std::inner_product(
                         r.feature->values().begin(), r.feature->values().end(),
                         r.feature->values().begin(), 0.0)) - 1.0) > 1e-6) {
      out.push_back("room " + std::to_string(r.id) + " feature is not unit-norm");
    }
  }

  for (const auto& inst : g.instances) {
    const std::string name = "instance " + std::to_string(inst.id);
    const auto it = inst_parents.find(inst.id);
    const size_t n = it == inst_parents.end() ? 0 : it->second.size();
    if (n != 1) {
      out.push_back(name + " has " + std::to_string(n) + " belongs-to edges");
    } else if (it->second.front() != inst.room_id) {
      out.push_back(name + " room_id disagrees with its edge");
    }
    const auto& v = inst.embedding.values();
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (v.size() != g.embedding_dim) out.push_back(name + " embedding dimension differs");
    else if (std::abs(norm - 1.0) > 1e-6) out.push_back(name + " embedding is not unit-norm");
    if (inst.weight != static_cast<int64_t>(inst.points.size())) {
      out.push_back(name + " weight differs from its point count");
    }
    if (g.voxel_size > 0.0 && inst.voxels != voxelize(inst.points, g.voxel_size)) {
      out.push_back(name + " voxels differ from its points");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr char kBlobMagic[4] = {'I', 'R', 'S', 'P'};
constexpr uint32_t kBlobVersion = 1;
constexpr size_t kBlobHeader = 16;

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void put_vec(std::ostream& os, const Vec3& v) {
  os << num(v.x()) << ' ' << num(v.y()) << ' ' << num(v.z());
}

void put_reals(std::ostream& os, const std::vector<double>& v) {
  for (double x : v) os << ' ' << num(x);
}

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const std::string& s, size_t off) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(s[off + i])) << (8 * i);
  return v;
}

uint64_t get_u64(const std::string& s, size_t off) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(s[off + i])) << (8 * i);
  return v;
}

struct BlobWriter {
  std::string points;  // payload only
  uint64_t count = 0;

  uint64_t add(const PointCloud& pts) {
    const uint64_t offset = count;
    for (const auto& p : pts) {
      for (int i = 0; i < 3; ++i) {
        const float f = static_cast<float>(p[i]);
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(points, bits);
      }
    }
    count += pts.size();
    return offset;
  }
};

void put_segment(std::ostream& os, const StructuralSegment& s, BlobWriter& blob) {
  const uint64_t off = blob.add(s.points);
  os << "segment " << to_string(s.cls) << ' ' << off << ' ' << s.points.size() << ' ';
  put_vec(os, s.centroid);
  os << ' ';
  put_vec(os, s.normal);
  os << '\n';
}

// Line-oriented manifest reader that keeps byte offsets for error messages.
class ManifestReader {
 public:
  explicit ManifestReader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    throw Error("graph: manifest byte " + std::to_string(token_offset_) + ": " + path + ": " + msg);
  }

  // Advances to the next line and returns its keyword.
  std::string_view next(const std::string& path) {
    if (pos_ >= text_.size()) {
      token_offset_ = pos_;
      fail(path, "unexpected end of manifest");
    }
    const size_t nl = text_.find('\n', pos_);
    if (nl == std::string::npos) {
      token_offset_ = text_.size();
      fail(path, "unterminated line");
    }
    line_start_ = pos_;
    line_ = std::string_view(text_).substr(pos_, nl - pos_);
    pos_ = nl + 1;
    cursor_ = 0;
    return word(path);
  }

  void expect_line(const std::string& keyword, const std::string& path) {
    const std::string_view kw = next(path);
    if (kw != keyword) {
      token_offset_ = line_start_;
      fail(path, "expected '" + keyword + "', found '" + std::string(kw) + "'");
    }
  }

  std::string_view word(const std::string& path) {
    while (cursor_ < line_.size() && line_[cursor_] == ' ') ++cursor_;
    token_offset_ = line_start_ + cursor_;
    if (cursor_ >= line_.size()) fail(path, "missing field");
    const size_t end = std::min(line_.find(' ', cursor_), line_.size());
    const std::string_view w = line_.substr(cursor_, end - cursor_);
    cursor_ = end;
    return w;
  }

  void keyword(const std::string& expected, const std::string& path) {
    const auto w = word(path);
    if (w != expected) fail(path, "expected '" + expected + "', found '" + std::string(w) + "'");
  }

  // Everything after the current cursor (one separating space skipped).
  std::string rest(const std::string& path) {
    if (cursor_ >= line_.size() || line_[cursor_] != ' ') {
      token_offset_ = line_start_ + cursor_;
      fail(path, "missing field");
    }
    std::string r(line_.substr(cursor_ + 1));
    cursor_ = line_.size();
    return r;
  }

  double real(const std::string& path) {
    const auto w = word(path);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || ptr != w.data() + w.size() || std::isnan(v)) {
      fail(path, "expected a real number, found '" + std::string(w) + "'");
    }
    return v;
  }

  template <typename Int>
  Int integer(const std::string& path) {
    const auto w = word(path);
    Int v{};
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || ptr != w.data() + w.size()) {
      fail(path, "expected an integer, found '" + std::string(w) + "'");
    }
    return v;
  }

  Vec3 vec(const std::string& path) {
    Vec3 v;
    for (int i = 0; i < 3; ++i) v[i] = real(path);
    return v;
  }

  void end_line(const std::string& path) {
    while (cursor_ < line_.size() && line_[cursor_] == ' ') ++cursor_;
    if (cursor_ != line_.size()) {
      token_offset_ = line_start_ + cursor_;
      fail(path, "trailing data");
    }
  }

  bool at_end() const { return pos_ >= text_.size(); }
  size_t position() const { return pos_; }

 private:
  const std::string& text_;
  size_t pos_ = 0;
  size_t line_start_ = 0;
  size_t token_offset_ = 0;
  std::string_view line_;
  size_t cursor_ = 0;
};

class BlobReader {
 public:
  explicit BlobReader(const std::string& blob) : blob_(blob) {
    if (blob.size() < kBlobHeader) fail(blob.size(), "header", "truncated header");
    if (std::memcmp(blob.data(), kBlobMagic, 4) != 0) fail(0, "header.magic", "bad magic");
    if (get_u32(blob, 4) != kBlobVersion) fail(4, "header.version", "unsupported version");
    count_ = get_u64(blob, 8);
    const uint64_t expected = kBlobHeader + count_ * 12;
    if (count_ > (blob.size() / 12) + 1 || blob.size() != expected) {
      fail(std::min<uint64_t>(blob.size(), expected), "points",
           "size does not match the declared " + std::to_string(count_) + " points");
    }
  }

  [[noreturn]] static void fail(uint64_t off, const std::string& path, const std::string& msg) {
    throw Error("graph: blob byte " + std::to_string(off) + ": " + path + ": " + msg);
  }

  uint64_t count() const { return count_; }

  PointCloud read(uint64_t offset, uint64_t n) const {
    PointCloud pts;
    pts.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
      Vec3 p;
      for (int k = 0; k < 3; ++k) {
        const uint32_t bits = get_u32(blob_, kBlobHeader + ((offset + i) * 3 + k) * 4);
        float f;
        std::memcpy(&f, &bits, 4);
        p[k] = f;
      }
      pts.push_back(p);
    }
    return pts;
  }

 private:
  const std::string& blob_;
  uint64_t count_ = 0;
};

}  // namespace

SerializedGraph serialize(const SceneGraph& g) {
  BlobWriter blob;
  std::ostringstream os;
  os << "IRSG v1\n";
  os << "building " << g.building.id << ' ' << g.building.name << '\n';
  os << "voxel_size " << num(g.voxel_size) << '\n';
  os << "dim " << g.embedding_dim << '\n';
  os << "rooms " << g.rooms.size() << '\n';
  for (const auto& r : g.rooms) {
    os << "room " << r.id << '\n';
    if (r.label) os << "label " << *r.label << '\n';
    else os << "nolabel\n";
    os << "bbox ";
    put_vec(os, r.bbox.min);
    os << ' ';
    put_vec(os, r.bbox.max);
    os << '\n';
    if (r.feature) {
      os << "feature";
      put_reals(os, r.feature->values());
      os << '\n';
    } else {
      os << "nofeature\n";
    }
    os << "walls " << r.wall_segments.size() << '\n';
    for (const auto& s : r.wall_segments) put_segment(os, s, blob);
    os << "horizontals " << r.horizontal_segments.size() << '\n';
    for (const auto& s : r.horizontal_segments) put_segment(os, s, blob);
  }
  os << "instances " << g.instances.size() << '\n';
  for (const auto& inst : g.instances) {
    const uint64_t off = blob.add(inst.points);
    os << "instance " << inst.id << " room " << inst.room_id << " weight " << inst.weight
       << " points " << off << ' ' << inst.points.size() << '\n';
    os << "bbox ";
    put_vec(os, inst.bbox.min);
    os << ' ';
    put_vec(os, inst.bbox.max);
    os << '\n';
    os << "embedding";
    put_reals(os, inst.embedding.values());
    os << '\n';
  }
  os << "edges " << g.edges.size() << '\n';
  for (const auto& e : g.edges) {
    if (e.kind == BelongsToEdge::Kind::kInstanceToRoom) {
      os << "edge instance " << e.child << " room " << e.parent << '\n';
    } else {
      os << "edge room " << e.child << " building " << e.parent << '\n';
    }
  }
  os << "end\n";

  SerializedGraph out;
  out.manifest = os.str();
  out.blob.reserve(kBlobHeader + blob.points.size());
  out.blob.append(kBlobMagic, 4);
  put_u32(out.blob, kBlobVersion);
  put_u64(out.blob, blob.count);
  out.blob += blob.points;
  return out;
}

SceneGraph deserialize(const SerializedGraph& data) {
  const BlobReader blob(data.blob);
  ManifestReader in(data.manifest);
  SceneGraph g;

  auto points = [&](const std::string& path) {
    const auto off = in.integer<uint64_t>(path + ".offset");
    const auto n = in.integer<uint64_t>(path + ".count");
    if (off > blob.count() || n > blob.count() - off) {
      in.fail(path, "point range exceeds the blob");
    }
    return blob.read(off, n);
  };
  auto embedding = [&](const std::string& path) {
    std::vector<double> v(g.embedding_dim);
    for (size_t i = 0; i < g.embedding_dim; ++i) v[i] = in.real(path);
    in.end_line(path);
    try {
      return Embedding::from_unit(std::move(v));
    } catch (const Error& e) {
      in.fail(path, e.what());
    }
  };
  auto bbox = [&](const std::string& path) {
    in.expect_line("bbox", path);
    AABB b;
    b.min = in.vec(path + ".min");
    b.max = in.vec(path + ".max");
    in.end_line(path);
    return b;
  };
  auto segments = [&](const std::string& keyword, const std::string& path) {
    in.expect_line(keyword, path);
    const auto n = in.integer<size_t>(path + ".count");
    in.end_line(path);
    std::vector<StructuralSegment> out;
    for (size_t i = 0; i < n; ++i) {
      const std::string sp = path + "[" + std::to_string(i) + "]";
      in.expect_line("segment", sp);
      StructuralSegment s;
      const auto cls_name = in.word(sp + ".class");
      const auto cls = parse_structural_class(cls_name);
      if (!cls) in.fail(sp + ".class", "unknown class '" + std::string(cls_name) + "'");
      s.cls = *cls;
      s.points = points(sp + ".points");
      s.centroid = in.vec(sp + ".centroid");
      s.normal = in.vec(sp + ".normal");
      in.end_line(sp);
      out.push_back(std::move(s));
    }
    return out;
  };

  in.expect_line("IRSG", "header");
  if (in.word("header.version") != "v1") in.fail("header.version", "unsupported version");
  in.end_line("header");

  in.expect_line("building", "building");
  g.building.id = in.integer<int>("building.id");
  g.building.name = in.rest("building.name");
  in.expect_line("voxel_size", "voxel_size");
  g.voxel_size = in.real("voxel_size");
  if (!(g.voxel_size > 0.0)) in.fail("voxel_size", "must be > 0");
  in.end_line("voxel_size");
  in.expect_line("dim", "dim");
  g.embedding_dim = in.integer<size_t>("dim");
  in.end_line("dim");

  in.expect_line("rooms", "rooms");
  const auto n_rooms = in.integer<size_t>("rooms.count");
  in.end_line("rooms");
  for (size_t i = 0; i < n_rooms; ++i) {
    const std::string path = "rooms[" + std::to_string(i) + "]";
    Room r;
    in.expect_line("room", path);
    r.id = in.integer<int>(path + ".id");
    in.end_line(path);
    const auto kw = in.next(path + ".label");
    if (kw == "label") r.label = in.rest(path + ".label");
    else if (kw == "nolabel") in.end_line(path + ".label");
    else in.fail(path + ".label", "expected 'label' or 'nolabel'");
    r.bbox = bbox(path + ".bbox");
    const auto fk = in.next(path + ".feature");
    if (fk == "feature") r.feature = embedding(path + ".feature");
    else if (fk == "nofeature") in.end_line(path + ".feature");
    else in.fail(path + ".feature", "expected 'feature' or 'nofeature'");
    r.wall_segments = segments("walls", path + ".walls");
    r.horizontal_segments = segments("horizontals", path + ".horizontals");
    g.rooms.push_back(std::move(r));
  }

  in.expect_line("instances", "instances");
  const auto n_inst = in.integer<size_t>("instances.count");
  in.end_line("instances");
  for (size_t i = 0; i < n_inst; ++i) {
    const std::string path = "instances[" + std::to_string(i) + "]";
    Instance inst;
    in.expect_line("instance", path);
    inst.id = in.integer<int>(path + ".id");
    in.keyword("room", path);
    inst.room_id = in.integer<int>(path + ".room");
    in.keyword("weight", path);
    inst.weight = in.integer<int64_t>(path + ".weight");
    in.keyword("points", path);
    inst.points = points(path + ".points");
    in.end_line(path);
    inst.voxels = voxelize(inst.points, g.voxel_size);
    inst.bbox = bbox(path + ".bbox");
    in.expect_line("embedding", path + ".embedding");
    inst.embedding = embedding(path + ".embedding");
    g.instances.push_back(std::move(inst));
  }

  in.expect_line("edges", "edges");
  const auto n_edges = in.integer<size_t>("edges.count");
  in.end_line("edges");
  for (size_t i = 0; i < n_edges; ++i) {
    const std::string path = "edges[" + std::to_string(i) + "]";
    in.expect_line("edge", path);
    BelongsToEdge e;
    const auto kind = in.word(path + ".kind");
    if (kind == "instance") {
      e.kind = BelongsToEdge::Kind::kInstanceToRoom;
      e.child = in.integer<int>(path + ".child");
      in.keyword("room", path);
    } else if (kind == "room") {
      e.kind = BelongsToEdge::Kind::kRoomToBuilding;
      e.child = in.integer<int>(path + ".child");
      in.keyword("building", path);
    } else {
      in.fail(path + ".kind", "expected 'instance' or 'room'");
    }
    e.parent = in.integer<int>(path + ".parent");
    in.end_line(path);
    g.edges.push_back(e);
  }
  in.expect_line("end", "end");
  in.end_line("end");
  if (!in.at_end()) in.fail("end", "data after end marker");
  return g;
}

namespace {

std::string graph_base(const std::string& path) {
  if (path.size() > 3 && path.compare(path.size() - 3, 3, ".sg") == 0) {
    return path.substr(0, path.size() - 3);
  }
  return path;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("graph: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("graph: cannot write '" + path + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("graph: write failed for '" + path + "'");
}

}  // namespace

void save_graph(const SceneGraph& graph, const std::string& path) {
  const auto base = graph_base(path);
  const auto data = serialize(graph);
  write_file(base + ".sg", data.manifest);
  write_file(base + ".sgp", data.blob);
}

SceneGraph load_graph(const std::string& path) {
  const auto base = graph_base(path);
  SerializedGraph data;
  data.manifest = read_file(base + ".sg");
  data.blob = read_file(base + ".sgp");
  return deserialize(data);
}

}  // namespace irs
