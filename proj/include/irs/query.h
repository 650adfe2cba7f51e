#pragma once

// Structured retrieval over a scene graph: optional room-label filter plus an
// object embedding, ranked by cosine similarity.

#include "irs/model.h"
#include "irs/semantics.h"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace irs {

struct StructuredQuery {
  std::optional<std::string> room_label;
  Embedding object_embedding;
  int k = 5;
  /// Vocabulary label the embedding came from, when known (display only).
  std::optional<std::string> object_label;
};

struct QueryHit {
  int instance_id = 0;
  int room_id = 0;
  double similarity = 0.0;
  Vec3 centroid = Vec3::Zero();  // navigation goal
};

struct QueryResult {
  std::vector<QueryHit> ranked;
  std::optional<std::string> reason;  // set when the result is empty by design
};

/// Throws Error when k < 1 or the embedding dimension differs from the graph.
QueryResult query(const SceneGraph& graph, const StructuredQuery& q);

/// Parses one query line: optional `room=<label>`, `k=<n>`, then either
/// `label=<vocab label>` or `dim` inline reals. Values containing spaces are
/// written in double quotes. Throws Error on malformed input.
StructuredQuery parse_query_line(std::string_view line, const PrototypeSet& vocab, size_t dim);

/// One query per non-empty line; `#` starts a comment.
std::vector<StructuredQuery> parse_query_file(std::string_view text, const PrototypeSet& vocab,
                                              size_t dim);

}  // namespace irs
