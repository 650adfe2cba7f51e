#include "irs/semantics.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace irs {

PrototypeSet::PrototypeSet(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].label.empty()) throw Error("prototypes: empty label");
    if (entries_[i].embedding.dim() != entries_.front().embedding.dim()) {
      throw Error("prototypes: mixed embedding dimensions at '" + entries_[i].label + "'");
    }
    for (size_t j = 0; j < i; ++j) {
      if (entries_[j].label == entries_[i].label) {
        throw Error("prototypes: duplicate label '" + entries_[i].label + "'");
      }
    }
  }
}

const Embedding* PrototypeSet::find(std::string_view label) const {
  for (const auto& e : entries_) {
    if (e.label == label) return &e.embedding;
  }
  return nullptr;
}

const std::array<std::string, 5>& standard_room_classes() {
  static const std::array<std::string, 5> kRooms = {"Kitchen", "Office", "Dining room", "Bedroom",
                                                    "Bathroom"};
  return kRooms;
}

void PrototypeSet::require_room_classes() const {
  for (const auto& name : standard_room_classes()) {
    if (!contains(name)) throw Error("prototypes: missing room class '" + name + "'");
  }
}

PrototypeSet parse_prototypes(std::string_view text, size_t dim) {
  std::vector<PrototypeSet::Entry> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
    if (tokens.empty() || tokens.front().starts_with('#')) continue;
    if (tokens.size() < dim + 1) {
      throw Error("prototypes: line " + std::to_string(line_no) + ": expected a label and " +
                  std::to_string(dim) + " values");
    }
    const size_t n_label = tokens.size() - dim;
    std::string label;
    for (size_t i = 0; i < n_label; ++i) label += (i ? " " : "") + tokens[i];
    std::vector<double> values(dim);
    for (size_t i = 0; i < dim; ++i) {
      const std::string& tok = tokens[n_label + i];
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), values[i]);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw Error("prototypes: line " + std::to_string(line_no) + ": bad value '" + tok + "'");
      }
    }
    entries.push_back({label, Embedding::normalized(std::move(values))});
  }
  return PrototypeSet(std::move(entries));
}

PrototypeSet load_prototypes(const std::string& path, size_t dim) {
  std::ifstream in(path);
  if (!in) throw Error("prototypes: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_prototypes(ss.str(), dim);
}

std::string format_prototypes(const PrototypeSet& set) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& e : set.entries()) {
    os << e.label;
    for (double v : e.embedding.values()) os << ' ' << v;
    os << '\n';
  }
  return os.str();
}

Embedding fuse_modalities(const Embedding& l1, const Embedding& l2, const Embedding& l3,
                          const std::array<double, 3>& alpha) {
  if (l1.dim() != l2.dim() || l1.dim() != l3.dim()) {
    throw Error("fuse_modalities: dimension mismatch");
  }
  if (std::abs(alpha[0] + alpha[1] + alpha[2] - 1.0) > 1e-9) {
    throw Error("fuse_modalities: alpha weights must sum to 1");
  }
  std::vector<double> sum(l1.dim());
  for (size_t i = 0; i < sum.size(); ++i) {
    sum[i] = alpha[0] * l1[i] + alpha[1] * l2[i] + alpha[2] * l3[i];
  }
  double sq = 0.0;
  for (double v : sum) sq += v * v;
  if (sq <= 1e-24) throw Error("degenerate fusion");
  return Embedding::normalized(std::move(sum));
}

double cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw Error("cosine: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                std::to_string(b.dim()) + ")");
  }
  double dot = 0.0;
  for (size_t i = 0; i < a.dim(); ++i) dot += a[i] * b[i];
  return std::clamp(dot, -1.0, 1.0);
}

EmbeddingAccumulator::EmbeddingAccumulator(const Embedding& e, int64_t weight)
    : mean_(e.values()), weight_(weight) {
  if (weight < 1) throw Error("embedding update: weight must be >= 1");
}

void EmbeddingAccumulator::add(const Embedding& e, int64_t weight) {
  merge(EmbeddingAccumulator(e, weight));
}

void EmbeddingAccumulator::merge(const EmbeddingAccumulator& other) {
  if (other.weight_ == 0) return;
  if (weight_ == 0) {
    *this = other;
    return;
  }
  if (mean_.size() != other.mean_.size()) throw Error("embedding update: dimension mismatch");
  const double total = static_cast<double>(weight_ + other.weight_);
  const double wa = static_cast<double>(weight_) / total;
  const double wb = static_cast<double>(other.weight_) / total;
  for (size_t i = 0; i < mean_.size(); ++i) mean_[i] = wa * mean_[i] + wb * other.mean_[i];
  weight_ += other.weight_;
}

Embedding update_instance_embedding(const Embedding& current, int64_t weight,
                                    const Embedding& incoming, int64_t incoming_weight) {
  if (current.dim() != incoming.dim()) throw Error("embedding update: dimension mismatch");
  if (weight < 1 || incoming_weight < 1) throw Error("embedding update: weights must be >= 1");
  const double wa = static_cast<double>(weight);
  const double wb = static_cast<double>(incoming_weight);
  std::vector<double> mixed(current.dim());
  for (size_t i = 0; i < mixed.size(); ++i) mixed[i] = wa * current[i] + wb * incoming[i];
  return Embedding::normalized(std::move(mixed));
}

namespace {

Embedding weighted_room_sum(std::span<const Instance* const> instances) {
  if (instances.empty()) throw Error("aggregate_room_feature: no instances");
  const size_t dim = instances.front()->embedding.dim();
  std::vector<double> sum(dim, 0.0);
  double total_volume = 0.0;
  for (const Instance* inst : instances) total_volume += inst->bbox.volume();
  for (const Instance* inst : instances) {
    if (inst->embedding.dim() != dim) throw Error("aggregate_room_feature: dimension mismatch");
    const double w = total_volume > 0.0 ? inst->bbox.volume() : 1.0;
    for (size_t i = 0; i < dim; ++i) sum[i] += w * inst->embedding[i];
  }
  return Embedding::normalized(std::move(sum));
}

}  // namespace

Embedding aggregate_room_feature(std::span<const Instance* const> instances) {
  return weighted_room_sum(instances);
}

Embedding aggregate_room_feature(std::span<const Instance> instances) {
  std::vector<const Instance*> ptrs;
  ptrs.reserve(instances.size());
  for (const auto& inst : instances) ptrs.push_back(&inst);
  return weighted_room_sum(ptrs);
}

std::string classify_room(const Embedding& feature, const PrototypeSet& prototypes) {
  if (prototypes.empty()) throw Error("classify_room: empty prototype set");
  size_t best = 0;
  double best_sim = cosine(feature, prototypes.entries()[0].embedding);
  for (size_t i = 1; i < prototypes.size(); ++i) {
    const double sim = cosine(feature, prototypes.entries()[i].embedding);
    if (sim > best_sim) {
      best = i;
      best_sim = sim;
    }
  }
  return prototypes.entries()[best].label;
}

std::vector<size_t> top_k_labels(const Embedding& feature, const PrototypeSet& vocab, size_t k) {
  std::vector<double> sims(vocab.size());
  for (size_t i = 0; i < vocab.size(); ++i) sims[i] = cosine(feature, vocab.entries()[i].embedding);
  std::vector<size_t> order(vocab.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return sims[a] > sims[b]; });
  order.resize(std::min(k, order.size()));
  return order;
}

}  // namespace irs
