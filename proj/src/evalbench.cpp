#include "irs/evalbench.h"

#include "irs/geometry.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>
#include <sstream>
#include <thread>

namespace irs {

std::vector<GtInstance> gt_instances(const GroundTruth& gt, double voxel_size) {
  std::vector<GtInstance> out;
  for (const auto* o : gt.observed_objects()) {
    out.push_back({o->id, o->label, voxelize(o->points, voxel_size)});
  }
  return out;
}

double voxel_iou(const VoxelSet& a, const VoxelSet& b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.voxel_size() != b.voxel_size()) throw Error("voxel_iou: voxel sizes differ");
  const auto inter = static_cast<double>(a.intersection_size(b));
  return inter / (static_cast<double>(a.size() + b.size()) - inter);
}

namespace {

struct Pair {
  size_t p, g;
  double iou;
};

std::vector<Pair> candidate_pairs(std::span<const Instance> pred, std::span<const GtInstance> gt,
                                  double iou_thr) {
  std::vector<Pair> pairs;
  for (size_t i = 0; i < pred.size(); ++i) {
    for (size_t j = 0; j < gt.size(); ++j) {
      if (pred[i].voxels.voxel_size() != gt[j].voxels.voxel_size()) {
        throw Error("evaluation: prediction and ground truth voxel sizes differ");
      }
      const double iou = voxel_iou(pred[i].voxels, gt[j].voxels);
      if (iou > 0.0 && iou >= iou_thr) pairs.push_back({i, j, iou});
    }
  }
  return pairs;
}

void sort_pairs(std::vector<Pair>& pairs, std::span<const Instance> pred,
                std::span<const GtInstance> gt) {
  std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (pred[a.p].id != pred[b.p].id) return pred[a.p].id < pred[b.p].id;
    return gt[a.g].id < gt[b.g].id;
  });
}

}  // namespace

std::vector<InstanceMatch> match_instances(std::span<const Instance> pred,
                                           std::span<const GtInstance> gt, double iou_thr) {
  auto pairs = candidate_pairs(pred, gt, iou_thr);
  sort_pairs(pairs, pred, gt);
  std::vector<bool> p_used(pred.size()), g_used(gt.size());
  std::vector<InstanceMatch> out;
  for (const auto& pr : pairs) {
    if (p_used[pr.p] || g_used[pr.g]) continue;
    p_used[pr.p] = g_used[pr.g] = true;
    out.push_back({pred[pr.p].id, gt[pr.g].id, pr.iou});
  }
  return out;
}

namespace {

bool in_top5(const Embedding& e, const std::string& label, const PrototypeSet& vocab) {
  for (size_t idx : top_k_labels(e, vocab, std::min<size_t>(5, vocab.size()))) {
    if (vocab.entries()[idx].label == label) return true;
  }
  return false;
}

}  // namespace

double top5_accuracy(std::span<const Instance> pred, std::span<const GtInstance> gt,
                     const PrototypeSet& vocab, double iou_thr) {
  if (gt.empty()) return 0.0;
  size_t hits = 0;
  for (const auto& m : match_instances(pred, gt, iou_thr)) {
    const auto p = std::find_if(pred.begin(), pred.end(), [&](const Instance& i) { return i.id == m.pred; });
    const auto g = std::find_if(gt.begin(), gt.end(), [&](const GtInstance& i) { return i.id == m.gt; });
    if (in_top5(p->embedding, g->label, vocab)) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(gt.size());
}

std::optional<double> class_agnostic_ap(std::span<const Instance> pred,
                                        std::span<const GtInstance> gt, double iou_thr) {
  if (gt.empty()) return std::nullopt;
  // Predictions of equal confidence are matched jointly and contribute one
  // PR point, so ids and list order do not matter.
  std::vector<size_t> order(pred.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return pred[a].weight > pred[b].weight; });
  const auto all_pairs = candidate_pairs(pred, gt, iou_thr);
  std::vector<bool> g_used(gt.size());
  std::vector<double> precision, recall;
  size_t tp = 0, seen = 0;
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    std::set<size_t> group;
    while (j < order.size() && pred[order[j]].weight == pred[order[i]].weight) group.insert(order[j++]);
    std::vector<Pair> pairs;
    for (const auto& p : all_pairs) {
      if (group.count(p.p)) pairs.push_back(p);
    }
    sort_pairs(pairs, pred, gt);
    std::set<size_t> p_used;
    for (const auto& p : pairs) {
      if (p_used.count(p.p) || g_used[p.g]) continue;
      p_used.insert(p.p);
      g_used[p.g] = true;
      ++tp;
    }
    seen += group.size();
    precision.push_back(static_cast<double>(tp) / static_cast<double>(seen));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gt.size()));
    i = j;
  }
  double ap = 0.0, prev_recall = 0.0;
  for (size_t k = 0; k < precision.size(); ++k) {
    const double p_interp = *std::max_element(precision.begin() + static_cast<long>(k), precision.end());
    ap += (recall[k] - prev_recall) * p_interp;
    prev_recall = recall[k];
  }
  return 100.0 * ap;
}

EvalReport evaluate(const SceneGraph& graph, const GroundTruth& truth, const PrototypeSet& vocab,
                    double iou_thr) {
  if (vocab.empty()) throw Error("evaluation: empty vocabulary");
  if (vocab.dim() != graph.embedding_dim) {
    throw Error("evaluation: vocabulary dimension " + std::to_string(vocab.dim()) +
                " does not match graph dimension " + std::to_string(graph.embedding_dim));
  }
  const auto gt = gt_instances(truth, graph.voxel_size);
  for (const auto& g : gt) {
    if (!vocab.contains(g.label)) throw Error("evaluation: label '" + g.label + "' missing from vocabulary");
  }
  EvalReport r;
  r.iou_threshold = iou_thr;
  r.gt_count = gt.size();
  r.pred_count = graph.instances.size();
  const auto matches = match_instances(graph.instances, gt, iou_thr);
  r.matched = matches.size();
  r.unmatched_pred = r.pred_count - r.matched;
  r.unmatched_gt = r.gt_count - r.matched;
  for (const auto& g : gt) ++r.per_class[g.label].gt;
  for (const auto& m : matches) {
    const auto* inst = graph.find_instance(m.pred);
    const auto g = std::find_if(gt.begin(), gt.end(), [&](const GtInstance& x) { return x.id == m.gt; });
    auto& cs = r.per_class[g->label];
    ++cs.matched;
    if (in_top5(inst->embedding, g->label, vocab)) ++cs.top5_hits;
  }
  r.top5 = top5_accuracy(graph.instances, gt, vocab, iou_thr);
  r.ap = class_agnostic_ap(graph.instances, gt, iou_thr);
  return r;
}

namespace {

std::string pct(std::optional<double> v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

}  // namespace

std::string format_eval_table(const EvalReport& r) {
  std::ostringstream os;
  char line[160];
  os << "# AP confidence = instance point count; IoU threshold " << pct(r.iou_threshold) << "\n";
  std::snprintf(line, sizeof line, "%-20s %8s\n", "metric", "value");
  os << line;
  std::snprintf(line, sizeof line, "%-20s %8s\n", "top5", pct(r.top5).c_str());
  os << line;
  std::snprintf(line, sizeof line, "%-20s %8s\n", "ap", pct(r.ap).c_str());
  os << line;
  std::snprintf(line, sizeof line, "%-20s %8zu\n%-20s %8zu\n%-20s %8zu\n%-20s %8zu\n%-20s %8zu\n",
                "gt_instances", r.gt_count, "pred_instances", r.pred_count, "matched", r.matched,
                "unmatched_pred", r.unmatched_pred, "unmatched_gt", r.unmatched_gt);
  os << line << "\n";
  std::snprintf(line, sizeof line, "%-20s %6s %8s %10s\n", "class", "gt", "matched", "top5_hits");
  os << line;
  for (const auto& [label, cs] : r.per_class) {
    std::snprintf(line, sizeof line, "%-20s %6zu %8zu %10zu\n", label.c_str(), cs.gt, cs.matched,
                  cs.top5_hits);
    os << line;
  }
  return os.str();
}

std::string format_eval_kv(const EvalReport& r) {
  std::ostringstream os;
  os << "iou_threshold=" << pct(r.iou_threshold) << "\ntop5=" << pct(r.top5) << "\nap=" << pct(r.ap)
     << "\ngt_instances=" << r.gt_count << "\npred_instances=" << r.pred_count
     << "\nmatched=" << r.matched << "\nunmatched_pred=" << r.unmatched_pred
     << "\nunmatched_gt=" << r.unmatched_gt << "\n";
  return os.str();
}

std::string format_eval_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "class,gt,matched,top5_hits\n";
  for (const auto& [label, cs] : r.per_class) {
    os << label << ',' << cs.gt << ',' << cs.matched << ',' << cs.top5_hits << '\n';
  }
  os << "ALL," << r.gt_count << ',' << r.matched << ",\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Benchmark

const BenchReport::ModeTiming* BenchReport::find(FusionMode m) const {
  for (const auto& t : modes) {
    if (t.mode == m) return &t;
  }
  return nullptr;
}

BenchReport bench_fusion(std::span<const MaskObservation> obs, const RoomSet& rooms,
                         const Config& cfg, const std::vector<FusionMode>& modes, int runs) {
  validate_config(cfg);
  if (runs < 1) throw Error("bench: runs must be >= 1");
  if (modes.empty()) throw Error("bench: no modes given");
  BenchReport report;
  report.observations = obs.size();
  report.rooms = rooms.rooms.size();
  report.workers = cfg.workers;
  report.hardware_threads = std::thread::hardware_concurrency();

  std::optional<std::vector<std::vector<ObservationKey>>> reference;
  for (FusionMode mode : modes) {
    BenchReport::ModeTiming timing;
    timing.mode = mode;
    std::vector<MaskObservation> work(obs.begin(), obs.end());
    const FusionResult warm = run_fusion(work, rooms, cfg, mode);
    auto partition = instance_partition(warm);
    if (!reference) {
      reference = std::move(partition);
      report.instances = warm.instances.size();
    } else if (partition != *reference) {
      throw Error(std::string("bench: instance partition of mode ") + std::string(to_string(mode)) +
                  " differs from mode " + std::string(to_string(modes.front())));
    }
    for (int r = 0; r < runs; ++r) {
      std::vector<MaskObservation> copy(obs.begin(), obs.end());
      const auto t0 = std::chrono::steady_clock::now();
      const FusionResult res = run_fusion(copy, rooms, cfg, mode);
      timing.runs.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      if (res.instances.size() != report.instances) throw Error("bench: run produced a different result");
    }
    auto sorted = timing.runs;
    std::sort(sorted.begin(), sorted.end());
    timing.median = sorted.size() % 2 ? sorted[sorted.size() / 2]
                                       : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
    report.modes.push_back(std::move(timing));
  }
  const auto* par = report.find(FusionMode::kParallel);
  const auto* ser = report.find(FusionMode::kSerialGlobal);
  if (!ser) ser = report.find(FusionMode::kSerialRooms);
  if (par && ser && ser->median > 0.0) {
    report.speedup_percent = 100.0 * (ser->median - par->median) / ser->median;
  }
  return report;
}

std::string format_bench_table(const BenchReport& r) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line,
                "# observations %zu, rooms %zu, instances %zu, workers %d, hardware threads %u\n",
                r.observations, r.rooms, r.instances, r.workers, r.hardware_threads);
  os << line;
  std::snprintf(line, sizeof line, "%-14s %12s %6s\n", "mode", "median_s", "runs");
  os << line;
  for (const auto& m : r.modes) {
    std::snprintf(line, sizeof line, "%-14s %12.6f %6zu\n", std::string(to_string(m.mode)).c_str(),
                  m.median, m.runs.size());
    os << line;
  }
  os << "speedup_percent " << pct(r.speedup_percent) << "\n";
  return os.str();
}

std::string format_bench_kv(const BenchReport& r) {
  std::ostringstream os;
  os << "observations=" << r.observations << "\nrooms=" << r.rooms << "\ninstances=" << r.instances
     << "\nworkers=" << r.workers << "\nhardware_threads=" << r.hardware_threads << "\n";
  for (const auto& m : r.modes) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", m.median);
    os << "median_" << to_string(m.mode) << '=' << buf << '\n';
  }
  os << "speedup_percent=" << pct(r.speedup_percent) << "\n";
  return os.str();
}

std::string format_bench_csv(const BenchReport& r) {
  std::ostringstream os;
  os << "mode,run,seconds\n";
  for (const auto& m : r.modes) {
    for (size_t i = 0; i < m.runs.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", m.runs[i]);
      os << to_string(m.mode) << ',' << i << ',' << buf << '\n';
    }
  }
  return os.str();
}

}  // namespace irs
