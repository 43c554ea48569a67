// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "pidgraph/property.hpp"

namespace pidgraph {

inline constexpr std::size_t kDefaultEmbeddingDim = 1024;

using Embedding = std::vector<double>;

/// Ordered by abstraction: complete < process < conceptual.
enum class AbstractionLevel { complete = 0, process = 1, conceptual = 2 };

std::string_view to_string(AbstractionLevel level);
AbstractionLevel parse_level(std::string_view text);

enum class EdgeKind { compositional, reference };

std::string_view to_string(EdgeKind kind);
EdgeKind parse_edge_kind(std::string_view text);

/// has-type relationships are the compositional ones.
bool is_compositional_type(std::string_view edge_type);

struct Node {
  std::string id;
  std::vector<std::string> labels;
  PropertyMap properties;
  std::optional<std::string> global_semantic;
  std::optional<std::string> local_semantic;
  std::optional<Embedding> global_embedding;
  std::optional<Embedding> local_embedding;

  bool has_label(std::string_view label) const;
  const std::string& primary_label() const { return labels.front(); }
  /// tagName when present, otherwise the primary label.
  std::string display_name() const;

  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  std::string id;
  std::string source;
  std::string target;
  std::string edge_type;
  EdgeKind kind = EdgeKind::reference;
  PropertyMap properties;

  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class Direction { outgoing, incoming };

struct Neighbor {
  const Node* node;
  const Edge* edge;
  Direction direction;
};

/// Labeled property graph for one flowsheet at one abstraction level.
/// Nodes and edges keep insertion order; ids are unique per namespace and
/// every edge references existing endpoints.
class Graph {
 public:
  explicit Graph(AbstractionLevel level = AbstractionLevel::complete,
                 std::size_t embedding_dim = kDefaultEmbeddingDim);

  AbstractionLevel level() const { return level_; }
  void set_level(AbstractionLevel level) { level_ = level; }
  std::size_t embedding_dim() const { return embedding_dim_; }

  /// Empty ids are replaced with a minted "gen:<n>" id.
  std::string add_node(Node node);
  std::string add_edge(Edge edge);

  bool has_node(std::string_view id) const;
  bool has_edge(std::string_view id) const;
  const Node& node(std::string_view id) const;
  const Edge& edge(std::string_view id) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  /// Node ids in ascending order.
  std::vector<std::string> sorted_node_ids() const;

  /// Adjacent nodes in either direction, minus `exclude`, ordered by edge id.
  std::vector<Neighbor> neighbors(std::string_view id,
                                  const std::set<std::string>& exclude = {}) const;
  /// Edge indices incident to the node, ordered by edge id.
  const std::vector<std::size_t>& incident_edges(std::string_view id) const;

  void set_semantics(std::string_view id, std::optional<std::string> global,
                     std::optional<std::string> local);
  void set_embeddings(std::string_view id, std::optional<Embedding> global,
                      std::optional<Embedding> local);
  void set_node_property(std::string_view id, const std::string& name, PropertyValue value);

  /// Throws when any structural invariant is violated.
  void validate() const;

 private:
  std::size_t index_of(std::string_view id) const;
  void check_embedding(const std::optional<Embedding>& e, std::string_view id) const;
  std::string mint_id(std::string_view prefix);

  AbstractionLevel level_;
  std::size_t embedding_dim_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, std::size_t> node_index_;
  std::unordered_map<std::string, std::size_t> edge_index_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::size_t minted_ = 0;
};

using GraphSnapshot = std::shared_ptr<const Graph>;

struct EdgePattern {
  std::string source_label;
  std::string edge_type;
  std::string target_label;
  auto operator<=>(const EdgePattern&) const = default;
};

struct GraphSchema {
  std::set<std::string> node_labels;
  std::set<std::string> edge_types;
  std::map<std::string, std::set<std::string>> properties_by_label;
  std::map<std::string, std::set<std::string>> properties_by_edge_type;
  /// Observed (primary source label, type, primary target label) triples.
  std::set<EdgePattern> edge_patterns;

  bool empty() const { return node_labels.empty() && edge_types.empty(); }
  friend bool operator==(const GraphSchema&, const GraphSchema&) = default;
};

GraphSchema schema(const Graph& graph);

/// Deterministic textual rendering of a node: labels, properties and
/// semantics. Never includes embeddings.
std::string node_context(const Graph& graph, std::string_view id);

/// Structural equality up to insertion order: same ids, labels,
/// properties, semantics, embeddings, edges.
bool equivalent(const Graph& a, const Graph& b, std::string* why = nullptr);

}  // namespace pidgraph
