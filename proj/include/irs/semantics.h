#pragma once

// Embedding arithmetic: modality fusion, cosine similarity, instance feature
// accumulation and volume-weighted room classification.

#include "irs/model.h"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace irs {

/// Labelled unit embeddings (room prototypes or object vocabulary).
class PrototypeSet {
 public:
  struct Entry {
    std::string label;
    Embedding embedding;
    bool operator==(const Entry&) const = default;
  };

  PrototypeSet() = default;
  /// Throws Error on duplicate labels or mixed dimensions.
  explicit PrototypeSet(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  size_t dim() const { return entries_.empty() ? 0 : entries_.front().embedding.dim(); }
  const Embedding* find(std::string_view label) const;
  bool contains(std::string_view label) const { return find(label) != nullptr; }

  /// Throws Error unless Kitchen, Office, Dining room, Bedroom and Bathroom
  /// are all present.
  void require_room_classes() const;

  bool operator==(const PrototypeSet&) const = default;

 private:
  std::vector<Entry> entries_;
};

/// The five room categories every room prototype set must carry.
const std::array<std::string, 5>& standard_room_classes();

/// One record per line: label (may contain spaces) followed by `dim` reals.
PrototypeSet parse_prototypes(std::string_view text, size_t dim);
PrototypeSet load_prototypes(const std::string& path, size_t dim);
std::string format_prototypes(const PrototypeSet& set);

/// normalize(a1*L1 + a2*L2 + a3*L3). Throws Error("degenerate fusion") on a
/// zero result and Error on weights that do not sum to 1.
Embedding fuse_modalities(const Embedding& l1, const Embedding& l2, const Embedding& l3,
                          const std::array<double, 3>& alpha);

/// Dot product of unit vectors. Throws Error on dimension mismatch.
double cosine(const Embedding& a, const Embedding& b);

/// Running point-count weighted mean of unit embeddings. The mean is kept
/// unnormalized so merges are associative; `unit()` is the instance feature.
class EmbeddingAccumulator {
 public:
  EmbeddingAccumulator() = default;
  EmbeddingAccumulator(const Embedding& e, int64_t weight);

  void add(const Embedding& e, int64_t weight);
  void merge(const EmbeddingAccumulator& other);

  int64_t weight() const { return weight_; }
  const std::vector<double>& mean() const { return mean_; }
  Embedding unit() const { return Embedding::normalized(mean_); }

 private:
  std::vector<double> mean_;
  int64_t weight_ = 0;
};

/// Renormalized point-count weighted mean of two embeddings.
Embedding update_instance_embedding(const Embedding& current, int64_t weight,
                                    const Embedding& incoming, int64_t incoming_weight);

/// Instance embeddings weighted by AABB volume; unweighted mean when every
/// volume is zero. Throws Error on an empty list.
Embedding aggregate_room_feature(std::span<const Instance> instances);
Embedding aggregate_room_feature(std::span<const Instance* const> instances);

/// Label with the highest cosine; ties go to the earlier entry.
std::string classify_room(const Embedding& feature, const PrototypeSet& prototypes);

/// Indices of the k most similar entries, best first (ties by list order).
std::vector<size_t> top_k_labels(const Embedding& feature, const PrototypeSet& vocab, size_t k);

}  // namespace irs
