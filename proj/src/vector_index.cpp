// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/vector_index.hpp"

#include <algorithm>
#include <cmath>

#include "pidgraph/errors.hpp"

namespace pidgraph {

namespace {

double dot(const Embedding& a, const Embedding& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Embedding& a) { return std::sqrt(dot(a, a)); }

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

double cosine_similarity(const Embedding& a, const Embedding& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::dimension, "cosine operands have dimensions " + std::to_string(a.size()) +
                                          " and " + std::to_string(b.size()));
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw Error(ErrorKind::invalid_argument, "cosine of a zero vector");
  return dot(a, b) / (na * nb);
}

std::string_view to_string(IndexName name) {
  return name == IndexName::global_semantic_index ? "global_semantic_index" : "local_semantic_index";
}

IndexName parse_index_name(std::string_view text) {
  if (text == "global_semantic_index" || text == "global") return IndexName::global_semantic_index;
  if (text == "local_semantic_index" || text == "local") return IndexName::local_semantic_index;
  throw Error(ErrorKind::configuration, "unknown vector index '" + std::string(text) + "'");
}

VectorIndex VectorIndex::build(const Graph& graph, IndexName name) {
  VectorIndex index(name, graph.embedding_dim());
  for (const auto& n : graph.nodes()) {
    const auto& e = name == IndexName::global_semantic_index ? n.global_embedding : n.local_embedding;
    if (!e) continue;
    index.add(n.id, *e, n.labels, node_context(graph, n.id));
  }
  return index;
}

void VectorIndex::add(std::string node_id, Embedding vector, std::vector<std::string> labels,
                      std::string content) {
  if (vector.size() != dim_) {
    throw Error(ErrorKind::dimension, "vector for '" + node_id + "' has dimension " +
                                          std::to_string(vector.size()) + ", index expects " +
                                          std::to_string(dim_));
  }
  for (double v : vector) {
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "non-finite entry for '" + node_id + "'");
  }
  const double n = norm(vector);
  if (n == 0.0) throw Error(ErrorKind::invalid_argument, "zero vector for '" + node_id + "'");
  entries_.push_back(Entry{std::move(node_id), std::move(vector), n, std::move(labels), std::move(content)});
}

std::vector<ScoredNode> VectorIndex::top_k(const Embedding& query, std::size_t k,
                                           const std::set<std::string>* restrict_to) const {
  if (entries_.empty()) throw Error(ErrorKind::empty_index, std::string(to_string(name_)) + " is empty");
  if (k == 0) throw Error(ErrorKind::invalid_argument, "k must be at least 1");
  if (query.size() != dim_) {
    throw Error(ErrorKind::dimension, "query has dimension " + std::to_string(query.size()) +
                                          ", index expects " + std::to_string(dim_));
  }
  const double qn = norm(query);
  if (qn == 0.0) throw Error(ErrorKind::invalid_argument, "query vector is zero");

  std::vector<std::pair<double, const Entry*>> scored;
  scored.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (restrict_to && !restrict_to->count(e.node_id)) continue;
    scored.emplace_back(dot(query, e.vector) / (qn * e.norm), &e);
  }
  auto better = [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->node_id < b.second->node_id;
  };
  const auto take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);

  std::vector<ScoredNode> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const auto* e = scored[i].second;
    out.push_back(ScoredNode{e->node_id, clamp_unit(scored[i].first), e->labels, e->content});
  }
  return out;
}

}  // namespace pidgraph
