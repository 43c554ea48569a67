// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pidgraph/graph.hpp"

namespace pidgraph {

/// (a.b) / (|a| |b|). Throws Error(dimension) on length mismatch and
/// Error(invalid_argument) when either operand is all-zero.
double cosine_similarity(const Embedding& a, const Embedding& b);

enum class IndexName { global_semantic_index, local_semantic_index };

std::string_view to_string(IndexName name);
IndexName parse_index_name(std::string_view text);

struct ScoredNode {
  std::string node_id;
  double score = 0.0;
  std::vector<std::string> node_labels;
  std::string content;
};

/// Exact cosine index over one embedding slot of a graph. Immutable after
/// construction, so concurrent reads are safe.
class VectorIndex {
 public:
  struct Entry {
    std::string node_id;
    Embedding vector;
    double norm = 0.0;
    std::vector<std::string> labels;
    std::string content;
  };

  VectorIndex(IndexName name, std::size_t dim) : name_(name), dim_(dim) {}

  /// One entry per node holding the matching embedding; nodes without
  /// it are skipped. Content is the node context rendering.
  static VectorIndex build(const Graph& graph, IndexName name);

  void add(std::string node_id, Embedding vector, std::vector<std::string> labels = {},
           std::string content = {});

  IndexName name() const { return name_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  /// min(k, candidates) results by descending score, ties by ascending id.
  /// When `restrict_to` is given only those node ids are candidates.
  std::vector<ScoredNode> top_k(const Embedding& query, std::size_t k,
                                const std::set<std::string>* restrict_to = nullptr) const;

 private:
  IndexName name_;
  std::size_t dim_;
  std::vector<Entry> entries_;
};

}  // namespace pidgraph
