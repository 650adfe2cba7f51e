#include "irs/query.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace irs {

QueryResult query(const SceneGraph& graph, const StructuredQuery& q) {
  if (q.k < 1) throw Error("query: k must be >= 1");
  if (q.object_embedding.dim() != graph.embedding_dim) {
    throw Error("query: embedding dimension " + std::to_string(q.object_embedding.dim()) +
                " does not match graph dimension " + std::to_string(graph.embedding_dim));
  }
  QueryResult result;
  std::set<int> allowed;
  if (q.room_label) {
    for (const auto& r : graph.rooms) {
      if (r.label && *r.label == *q.room_label) allowed.insert(r.id);
    }
    if (allowed.empty()) {
      result.reason = "room not found";
      return result;
    }
  }
  for (const auto& inst : graph.instances) {
    if (q.room_label && !allowed.count(inst.room_id)) continue;
    result.ranked.push_back(
        {inst.id, inst.room_id, cosine(inst.embedding, q.object_embedding), inst.centroid()});
  }
  std::sort(result.ranked.begin(), result.ranked.end(), [](const QueryHit& a, const QueryHit& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.instance_id < b.instance_id;
  });
  if (result.ranked.size() > static_cast<size_t>(q.k)) result.ranked.resize(q.k);
  if (result.ranked.empty()) result.reason = "no instances in scope";
  return result;
}

namespace {

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::string tok;
    bool quoted = false;
    while (i < line.size() && (quoted || !std::isspace(static_cast<unsigned char>(line[i])))) {
      if (line[i] == '"') quoted = !quoted;
      else tok.push_back(line[i]);
      ++i;
    }
    if (quoted) throw Error("query: unterminated quote");
    out.push_back(std::move(tok));
  }
  return out;
}

}  // namespace

StructuredQuery parse_query_line(std::string_view line, const PrototypeSet& vocab, size_t dim) {
  const auto tokens = tokenize(line);
  StructuredQuery q;
  bool have_k = false;
  std::vector<double> reals;
  for (const auto& t : tokens) {
    if (t.rfind("room=", 0) == 0) {
      if (have_k || !reals.empty() || q.object_label) throw Error("query: room= must come first");
      q.room_label = t.substr(5);
      if (q.room_label->empty()) throw Error("query: empty room label");
    } else if (t.rfind("k=", 0) == 0) {
      const std::string_view v = std::string_view(t).substr(2);
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), q.k);
      if (ec != std::errc() || ptr != v.data() + v.size() || q.k < 1) {
        throw Error("query: k must be a positive integer, got '" + std::string(v) + "'");
      }
      have_k = true;
    } else if (t.rfind("label=", 0) == 0) {
      if (!reals.empty() || q.object_label) throw Error("query: give either label= or reals");
      const std::string label = t.substr(6);
      const Embedding* e = vocab.find(label);
      if (!e) throw Error("query: unknown vocabulary label '" + label + "'");
      q.object_label = label;
      q.object_embedding = *e;
    } else {
      if (q.object_label) throw Error("query: give either label= or reals");
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw Error("query: unexpected token '" + t + "'");
      }
      reals.push_back(v);
    }
  }
  if (!have_k) throw Error("query: missing k=<n>");
  if (!q.object_label) {
    if (reals.size() != dim) {
      throw Error("query: expected " + std::to_string(dim) + " embedding values, got " +
                  std::to_string(reals.size()));
    }
    q.object_embedding = Embedding::normalized(std::move(reals));
  } else if (q.object_embedding.dim() != dim) {
    throw Error("query: vocabulary dimension does not match the graph");
  }
  return q;
}

std::vector<StructuredQuery> parse_query_file(std::string_view text, const PrototypeSet& vocab,
                                              size_t dim) {
  std::vector<StructuredQuery> out;
  size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(parse_query_line(line, vocab, dim));
    } catch (const Error& e) {
      throw Error("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace irs
