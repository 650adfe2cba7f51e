#include "doctest.h"

#include "irs/pipeline.h"
#include "irs/synth.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace irs;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("irs_synth_" + name);
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SceneSpec small_spec(uint64_t seed) {
  SceneSpec s;
  s.seed = seed;
  s.frames_per_room = 12;
  return s;
}

}  // namespace

TEST_CASE("empty single room") {
  SceneSpec s;
  s.rooms_x = s.rooms_y = 1;
  s.objects_per_room = 0;
  s.frames_per_room = 8;
  const SyntheticScene scene = generate_scene(s);
  CHECK(scene.truth.rooms.size() == 1);
  CHECK(scene.truth.objects.empty());
  size_t masks = 0, structs = 0;
  for (const auto& f : scene.sequence.frames) {
    masks += f.masks.size();
    structs += f.structs.size();
  }
  CHECK(masks == 0);
  CHECK(structs > 0);
}

TEST_CASE("default grid counts") {
  const SyntheticScene scene = generate_scene(small_spec(1));
  CHECK(scene.truth.rooms.size() == 4);
  CHECK(scene.truth.objects.size() == 12);
  CHECK(scene.sequence.frames.size() == 48);
  CHECK(scene.sequence.vocabulary.size() == 20);
  CHECK_NOTHROW(scene.sequence.prototypes.require_room_classes());
}

TEST_CASE("same spec twice is identical") {
  const SyntheticScene a = generate_scene(small_spec(3));
  const SyntheticScene b = generate_scene(small_spec(3));
  CHECK(a.sequence.frames == b.sequence.frames);
  CHECK(a.truth == b.truth);
  const SyntheticScene c = generate_scene(small_spec(4));
  CHECK_FALSE(a.truth == c.truth);
}

TEST_CASE("emit then read back") {
  const SyntheticScene scene = generate_scene(small_spec(5));
  const fs::path d = temp_dir("roundtrip");
  emit_sequence(scene.sequence, &scene.truth, d.string());
  const Sequence back = read_sequence(d.string());
  CHECK(back.intrinsics == scene.sequence.intrinsics);
  CHECK(back.dim == scene.sequence.dim);
  CHECK(back.vocabulary == scene.sequence.vocabulary);
  CHECK(back.prototypes == scene.sequence.prototypes);
  CHECK(back.frames == scene.sequence.frames);
  CHECK(read_ground_truth(d.string()) == scene.truth);
}

TEST_CASE("emit without ground truth writes no sidecar") {
  const SyntheticScene scene = generate_scene(small_spec(6));
  const fs::path d = temp_dir("nogt");
  emit_sequence(scene.sequence, nullptr, d.string());
  CHECK(fs::exists(d / "manifest.txt"));
  CHECK_FALSE(fs::exists(d / "gt.txt"));
  CHECK_FALSE(fs::exists(d / "gt.bin"));
  CHECK_THROWS_AS(read_ground_truth(d.string()), Error);
}

TEST_CASE("emit twice writes identical bytes") {
  const SyntheticScene scene = generate_scene(small_spec(7));
  const fs::path a = temp_dir("twice_a"), b = temp_dir("twice_b");
  emit_sequence(scene.sequence, &scene.truth, a.string());
  emit_sequence(scene.sequence, &scene.truth, b.string());
  size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
  CHECK(files > 10);
}

TEST_CASE("unwritable path fails") {
  const SyntheticScene scene = generate_scene(small_spec(8));
  const fs::path blocker = temp_dir("blocker");
  { std::ofstream(blocker) << "x"; }
  CHECK_THROWS_AS(emit_sequence(scene.sequence, nullptr, (blocker / "sub").string()), Error);
}

TEST_CASE("missing manifest fails to read") {
  const fs::path d = temp_dir("empty");
  fs::create_directories(d);
  CHECK_THROWS_AS(read_sequence(d.string()), Error);
}

TEST_CASE("depth reprojection matches generator points") {
  const SyntheticScene scene = generate_scene(small_spec(9));
  const auto& seq = scene.sequence;
  double worst = 0.0;
  size_t n = 0;
  for (size_t f = 0; f < seq.frames.size(); ++f) {
    const Frame& fr = seq.frames[f];
    for (size_t m = 0; m < fr.masks.size(); ++m) {
      const PointCloud pts = project_mask(fr.depth, fr.masks[m].pixels, seq.intrinsics, fr.pose);
      const PointCloud& want = scene.mask_world_points[f][m];
      REQUIRE(pts.size() == want.size());
      for (size_t i = 0; i < pts.size(); ++i) worst = std::max(worst, (pts[i] - want[i]).norm());
      n += pts.size();
    }
  }
  CHECK(n > 1000);
  CHECK(worst <= 1e-4);
}

TEST_CASE("visible points are in front of the camera and inside the frustum") {
  const SyntheticScene scene = generate_scene(small_spec(10));
  const auto& k = scene.sequence.intrinsics;
  for (size_t f = 0; f < scene.sequence.frames.size(); ++f) {
    const Frame& fr = scene.sequence.frames[f];
    for (const auto& pts : scene.mask_world_points[f]) {
      for (const auto& p : pts) {
        const Vec3 c = fr.pose.rotation.transpose() * (p - fr.pose.translation);
        REQUIRE(c.z() > 0.0);
        const double u = k.fx * c.x() / c.z() + k.cx, v = k.fy * c.y() / c.z() + k.cy;
        CHECK(u >= -0.5);
        CHECK(u <= k.width + 0.5);
        CHECK(v >= -0.5);
        CHECK(v <= k.height + 0.5);
      }
    }
  }
}

TEST_CASE("masks follow the room prior and border policy") {
  SceneSpec s = small_spec(11);
  const SyntheticScene scene = generate_scene(s);
  const int per_room = s.frames_per_room;
  for (const auto& fr : scene.sequence.frames) {
    for (const auto& m : fr.masks) {
      const int obj = scene.truth.mask_object.at({fr.id, m.mask_id});
      const int visit = fr.id / per_room;
      // serpentine room order
      const int iy = visit / s.rooms_x;
      const int ix = iy % 2 == 0 ? visit % s.rooms_x : s.rooms_x - 1 - visit % s.rooms_x;
      CHECK(scene.truth.objects[static_cast<size_t>(obj)].room_id == iy * s.rooms_x + ix);
      for (const auto& px : m.pixels) {
        CHECK(px.u > 0);
        CHECK(px.u < s.image_width - 1);
      }
    }
  }
  s.cross_room_masks = true;
  s.truncated_masks = true;
  const SyntheticScene loose = generate_scene(s);
  size_t strict_n = 0, loose_n = 0;
  for (const auto& fr : scene.sequence.frames) strict_n += fr.masks.size();
  for (const auto& fr : loose.sequence.frames) loose_n += fr.masks.size();
  CHECK(loose_n > strict_n);
}

TEST_CASE("noise keeps unit norm and moves the embedding") {
  std::mt19937_64 rng(12);
  const Embedding e = random_unit_embedding(64, rng);
  const Embedding p = perturb_embedding(e, 0.1, rng);
  double norm = 0.0, dot = 0.0;
  for (size_t i = 0; i < 64; ++i) {
    norm += p[i] * p[i];
    dot += p[i] * e[i];
  }
  CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-12);
  CHECK(dot < 1.0);
  CHECK(dot > 0.98);
  CHECK(perturb_embedding(e, 0.0, rng) == e);
}

TEST_CASE("structural labels recover the room grid") {
  for (int nx = 1; nx <= 3; ++nx) {
    for (int ny = 1; ny <= 2; ++ny) {
      SceneSpec s;
      s.rooms_x = nx;
      s.rooms_y = ny;
      s.objects_per_room = 0;
      s.frames_per_room = 2;
      const SyntheticScene scene = generate_scene(s);
      const RoomSet rs = segment_rooms(structural_batches(scene.sequence, Config{}), Config{});
      CHECK(rs.rooms.size() == static_cast<size_t>(nx * ny));
    }
  }
}

TEST_CASE("spec text round trip and validation") {
  SceneSpec s;
  s.rooms_x = 3;
  s.noise_sigma = 0.1;
  s.windows = false;
  s.cross_room_masks = true;
  CHECK(parse_scene_spec(format_scene_spec(s)) == s);
  CHECK_THROWS_AS(parse_scene_spec("rooms_x = 0"), Error);
  CHECK_THROWS_AS(parse_scene_spec("color = red"), Error);
  CHECK_THROWS_AS(parse_scene_spec("windows = maybe"), Error);
  CHECK_THROWS_AS(parse_scene_spec("door_width = 9"), Error);
  CHECK_THROWS_AS(parse_scene_spec("door_height = 2.55"), Error);
}

TEST_CASE("overfull rooms are reported") {
  SceneSpec s;
  s.objects_per_room = 20;
  s.frames_per_room = 1;
  CHECK_THROWS_WITH_AS(generate_scene(s), "scene overfull", Error);
}
