// irs: build, query and evaluate room-partitioned 3D scene graphs.

#include "irs/evalbench.h"
#include "irs/graph.h"
#include "irs/pipeline.h"
#include "irs/query.h"
#include "irs/synth.h"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace irs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitInput = 2;

// Input/usage problems map to exit code 2.
struct InputError : Error {
  using Error::Error;
};

bool g_quiet = false;

void progress(const std::string& msg) {
  if (!g_quiet) std::cerr << msg << '\n';
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

// Config flags mirror config-file keys: --tau-g <-> tau_g.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_file, "config file (key = value)");
    for (const auto& key : config_keys()) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      app.add_option(flag, values[key], "override config key " + key);
    }
  }

  Config resolve() const {
    Config cfg;
    if (const char* env = std::getenv("IRS_WORKERS"); env && *env) {
      try {
        set_config_value(cfg, "workers", env);
      } catch (const Error& e) {
        throw InputError(std::string("IRS_WORKERS: ") + e.what());
      }
    }
    try {
      if (!config_file.empty()) cfg = load_config_file(config_file, cfg);
      for (const auto& [key, value] : values) {
        if (!value.empty()) set_config_value(cfg, key, value);
      }
      return validate_config(cfg);
    } catch (const InputError&) {
      throw;
    } catch (const Error& e) {
      throw InputError(e.what());
    }
  }
};

FusionMode mode_from(const std::string& name) {
  const auto m = parse_fusion_mode(name);
  if (!m) throw InputError("unknown mode '" + name + "' (parallel, serial_rooms, serial_global)");
  return *m;
}

Sequence load_sequence(const std::string& dir) {
  if (!fs::exists(fs::path(dir) / "manifest.txt")) {
    throw InputError("missing manifest: " + (fs::path(dir) / "manifest.txt").string());
  }
  try {
    return read_sequence(dir);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
}

SceneGraph load_graph_input(const std::string& path) {
  try {
    return load_graph(path);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
}

PrototypeSet load_vocab(const std::string& vocab_file, const std::string& seq_dir, size_t dim) {
  try {
    if (!vocab_file.empty()) return load_prototypes(vocab_file, dim);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  if (!seq_dir.empty()) {
    Sequence seq = load_sequence(seq_dir);
    if (seq.dim != dim) {
      throw InputError("vocabulary dimension " + std::to_string(seq.dim) +
                       " does not match graph dimension " + std::to_string(dim));
    }
    return seq.vocabulary;
  }
  return {};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string spec_file, out;
  std::optional<uint64_t> seed;
  std::optional<int> rooms_x, rooms_y, objects, frames;
  std::optional<double> noise, door_width;
  bool no_gt = false;
};

int cmd_synth(const SynthArgs& a) {
  SceneSpec spec;
  try {
    if (!a.spec_file.empty()) spec = load_scene_spec(a.spec_file);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  if (a.seed) spec.seed = *a.seed;
  if (a.rooms_x) spec.rooms_x = *a.rooms_x;
  if (a.rooms_y) spec.rooms_y = *a.rooms_y;
  if (a.objects) spec.objects_per_room = *a.objects;
  if (a.frames) spec.frames_per_room = *a.frames;
  if (a.noise) spec.noise_sigma = *a.noise;
  if (a.door_width) spec.door_width = *a.door_width;
  SyntheticScene scene;
  try {
    scene = generate_scene(spec);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  emit_sequence(scene.sequence, a.no_gt ? nullptr : &scene.truth, a.out);
  size_t masks = 0;
  for (const auto& f : scene.sequence.frames) masks += f.masks.size();
  std::cout << "sequence " << a.out << ": rooms " << scene.truth.rooms.size() << ", objects "
            << scene.truth.objects.size() << ", frames " << scene.sequence.frames.size()
            << ", masks " << masks << "\n";
  return kExitOk;
}

struct BuildArgs {
  std::string seq, out, mode = "parallel";
  ConfigFlags flags;
};

int cmd_build(const BuildArgs& a) {
  const Config cfg = a.flags.resolve();
  const FusionMode mode = mode_from(a.mode);
  progress("reading sequence " + a.seq);
  const Sequence seq = load_sequence(a.seq);
  if (seq.frames.empty()) throw InputError("sequence has no frames");
  BuildResult res;
  try {
    res = run_build(seq, cfg, mode);
  } catch (const StageError& e) {
    std::cerr << "irs build: stage " << e.stage() << " failed: " << e.what() << "\n";
    return kExitPipeline;
  }
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  save_graph(res.graph, a.out);
  for (const auto& t : res.timings) {
    std::cout << "stage " << t.stage << " " << fmt("%.3f", t.seconds) << " s";
    if (t.stage == "fusion") std::cout << " (mode " << to_string(mode) << ", workers " << cfg.workers << ")";
    std::cout << "\n";
  }
  std::cout << "rooms " << res.graph.rooms.size() << "\ninstances " << res.graph.instances.size()
            << "\nobservations " << res.observations << " (dropped masks " << res.dropped_masks
            << ")\n";
  return kExitOk;
}

struct QueryArgs {
  std::string graph, queries, room, label, vocab, seq;
  int k = 5;
};

int cmd_query(const QueryArgs& a) {
  const SceneGraph g = load_graph_input(a.graph);
  const PrototypeSet vocab = load_vocab(a.vocab, a.seq, g.embedding_dim);
  std::vector<StructuredQuery> queries;
  try {
    if (!a.queries.empty()) {
      queries = parse_query_file(read_text(a.queries), vocab, g.embedding_dim);
    } else {
      if (a.label.empty()) throw InputError("give --queries or --label");
      std::string line;
      if (!a.room.empty()) line += "room=\"" + a.room + "\" ";
      line += "k=" + std::to_string(a.k) + " label=\"" + a.label + "\"";
      queries.push_back(parse_query_line(line, vocab, g.embedding_dim));
    }
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  for (size_t qi = 0; qi < queries.size(); ++qi) {
    const auto& q = queries[qi];
    std::cout << "query " << qi + 1 << ":";
    if (q.room_label) std::cout << " room=" << *q.room_label;
    std::cout << " k=" << q.k;
    if (q.object_label) std::cout << " label=" << *q.object_label;
    std::cout << "\n";
    const QueryResult r = query(g, q);
    if (r.ranked.empty()) {
      std::cout << "  " << r.reason.value_or("no results") << "\n";
      continue;
    }
    char line[200];
    std::snprintf(line, sizeof line, "  %-4s %-8s %-14s %-10s %s\n", "rank", "instance", "room",
                  "similarity", "centroid");
    std::cout << line;
    for (size_t i = 0; i < r.ranked.size(); ++i) {
      const auto& h = r.ranked[i];
      const Room* room = g.find_room(h.room_id);
      const std::string rl = room && room->label ? *room->label : "-";
      std::snprintf(line, sizeof line, "  %-4zu %-8d %-14s %-10.4f %.3f %.3f %.3f\n", i + 1,
                    h.instance_id, rl.c_str(), h.similarity, h.centroid.x(), h.centroid.y(),
                    h.centroid.z());
      std::cout << line;
    }
  }
  return kExitOk;
}

struct EvalArgs {
  std::string graph, seq, gt, vocab, csv, kv;
  double iou = 0.5;
};

int cmd_eval(const EvalArgs& a) {
  const SceneGraph g = load_graph_input(a.graph);
  const std::string gt_dir = a.gt.empty() ? a.seq : a.gt;
  if (gt_dir.empty()) throw InputError("give --seq or --gt");
  GroundTruth gt;
  try {
    gt = read_ground_truth(gt_dir);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  const PrototypeSet vocab = load_vocab(a.vocab, a.vocab.empty() ? a.seq : "", g.embedding_dim);
  if (vocab.empty()) throw InputError("no vocabulary: give --vocab or --seq");
  EvalReport r;
  try {
    r = evaluate(g, gt, vocab, a.iou);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  std::cout << format_eval_table(r);
  if (!a.csv.empty()) write_text(a.csv, format_eval_csv(r));
  if (!a.kv.empty()) write_text(a.kv, format_eval_kv(r));
  return kExitOk;
}

struct BenchArgs {
  std::string seq, csv, kv;
  std::vector<std::string> modes = {"parallel", "serial_rooms", "serial_global"};
  int runs = 3;
  ConfigFlags flags;
};

int cmd_bench(const BenchArgs& a) {
  const Config cfg = a.flags.resolve();
  std::vector<FusionMode> modes;
  for (const auto& m : a.modes) modes.push_back(mode_from(m));
  const Sequence seq = load_sequence(a.seq);
  RoomSet rooms;
  std::vector<MaskObservation> obs;
  try {
    progress("segmenting rooms");
    RoomSegmenter seg(cfg);
    for (auto& batch : structural_batches(seq, cfg)) seg.add_batch(std::move(batch));
    rooms = std::move(seg).finish();
    progress("extracting observations");
    obs = extract_observations(seq, cfg);
  } catch (const Error& e) {
    std::cerr << "irs bench: " << e.what() << "\n";
    return kExitPipeline;
  }
  BenchReport r;
  try {
    progress("timing fusion");
    r = bench_fusion(obs, rooms, cfg, modes, a.runs);
  } catch (const Error& e) {
    std::cerr << "irs bench: aborted: " << e.what() << "\n";
    return kExitPipeline;
  }
  std::cout << format_bench_table(r);
  if (!a.csv.empty()) write_text(a.csv, format_bench_csv(r));
  if (!a.kv.empty()) write_text(a.kv, format_bench_kv(r));
  return kExitOk;
}

int cmd_inspect(const std::string& path) {
  const SceneGraph g = load_graph_input(path);
  std::cout << "building " << g.building.id << " " << g.building.name << "\n"
            << "voxel_size " << g.voxel_size << ", embedding dim " << g.embedding_dim << "\n"
            << "rooms " << g.rooms.size() << ", instances " << g.instances.size() << ", edges "
            << g.edges.size() << "\n";
  for (const auto& r : g.rooms) {
    size_t n = 0;
    for (const auto& inst : g.instances) n += inst.room_id == r.id;
    char line[200];
    std::snprintf(line, sizeof line,
                  "  room %-3d %-14s instances %-4zu segments %-4zu bbox [%.2f %.2f %.2f] - [%.2f %.2f %.2f]\n",
                  r.id, r.label.value_or("-").c_str(), n, r.segment_count(), r.bbox.min.x(),
                  r.bbox.min.y(), r.bbox.min.z(), r.bbox.max.x(), r.bbox.max.y(), r.bbox.max.z());
    std::cout << line;
  }
  const auto problems = validate(g);
  if (problems.empty()) {
    std::cout << "validation: ok\n";
  } else {
    std::cout << "validation: " << problems.size() << " problem(s)\n";
    for (const auto& p : problems) std::cout << "  " << p << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Room-partitioned 3D scene graph builder"};
  app.require_subcommand(1);
  app.add_flag("-q,--quiet", g_quiet, "suppress progress messages");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a synthetic sequence with ground truth");
  s->add_option("--spec", synth.spec_file, "scene spec file (key = value)");
  s->add_option("-o,--out", synth.out, "output directory")->required();
  s->add_option("--seed", synth.seed, "random seed");
  s->add_option("--rooms-x", synth.rooms_x);
  s->add_option("--rooms-y", synth.rooms_y);
  s->add_option("--objects", synth.objects, "objects per room");
  s->add_option("--frames", synth.frames, "frames per room");
  s->add_option("--noise", synth.noise, "embedding noise sigma");
  s->add_option("--door-width", synth.door_width);
  s->add_flag("--no-gt", synth.no_gt, "do not write gt.txt / gt.bin");

  BuildArgs build;
  auto* b = app.add_subcommand("build", "build a scene graph from a sequence");
  b->add_option("--seq", build.seq, "sequence directory")->required();
  b->add_option("-o,--out", build.out, "output graph path (<name> or <name>.sg)")->required();
  b->add_option("--mode", build.mode, "parallel | serial_rooms | serial_global");
  build.flags.add_to(*b);

  QueryArgs qa;
  auto* q = app.add_subcommand("query", "query a scene graph");
  q->add_option("-g,--graph", qa.graph, "graph path")->required();
  q->add_option("--queries", qa.queries, "query file");
  q->add_option("--room", qa.room, "room label filter");
  q->add_option("--label", qa.label, "vocabulary label");
  q->add_option("--k", qa.k, "number of results");
  q->add_option("--vocab", qa.vocab, "vocabulary file (label followed by D reals)");
  q->add_option("--seq", qa.seq, "sequence directory providing the vocabulary");

  EvalArgs ea;
  auto* e = app.add_subcommand("eval", "evaluate a graph against ground truth");
  e->add_option("-g,--graph", ea.graph, "graph path")->required();
  e->add_option("--seq", ea.seq, "sequence directory (ground truth and vocabulary)");
  e->add_option("--gt", ea.gt, "directory holding gt.txt / gt.bin");
  e->add_option("--vocab", ea.vocab, "vocabulary file");
  e->add_option("--iou", ea.iou, "IoU threshold");
  e->add_option("--csv", ea.csv, "write per-class CSV");
  e->add_option("--kv", ea.kv, "write key=value summary");

  BenchArgs ba;
  auto* be = app.add_subcommand("bench", "time fusion modes on a sequence");
  be->add_option("--seq", ba.seq, "sequence directory")->required();
  be->add_option("--modes", ba.modes, "modes to time");
  be->add_option("--runs", ba.runs, "timed runs per mode");
  be->add_option("--csv", ba.csv, "write per-run CSV");
  be->add_option("--kv", ba.kv, "write key=value summary");
  ba.flags.add_to(*be);

  std::string inspect_path;
  auto* in = app.add_subcommand("inspect", "print a graph summary");
  in->add_option("graph", inspect_path, "graph path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*b) return cmd_build(build);
    if (*q) return cmd_query(qa);
    if (*e) return cmd_eval(ea);
    if (*be) return cmd_bench(ba);
    if (*in) return cmd_inspect(inspect_path);
  } catch (const InputError& err) {
    std::cerr << "irs: " << err.what() << "\n";
    return kExitInput;
  } catch (const std::exception& err) {
    std::cerr << "irs: " << err.what() << "\n";
    return kExitPipeline;
  }
  return kExitInput;
}
