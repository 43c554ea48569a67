// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/graph.hpp"

#include <algorithm>
#include <cmath>

#include "pidgraph/errors.hpp"
#include "pidgraph/text.hpp"

namespace pidgraph {

std::string_view to_string(AbstractionLevel level) {
  switch (level) {
    case AbstractionLevel::complete: return "complete";
    case AbstractionLevel::process: return "process";
    case AbstractionLevel::conceptual: return "conceptual";
  }
  return "complete";
}

AbstractionLevel parse_level(std::string_view text) {
  if (text == "complete") return AbstractionLevel::complete;
  if (text == "process") return AbstractionLevel::process;
  if (text == "conceptual") return AbstractionLevel::conceptual;
  throw Error(ErrorKind::not_found, "unknown abstraction level '" + std::string(text) + "'");
}

std::string_view to_string(EdgeKind kind) {
  return kind == EdgeKind::compositional ? "compositional" : "reference";
}

EdgeKind parse_edge_kind(std::string_view text) {
  if (text == "compositional") return EdgeKind::compositional;
  if (text == "reference") return EdgeKind::reference;
  throw Error(ErrorKind::schema, "unknown edge kind '" + std::string(text) + "'");
}

bool is_compositional_type(std::string_view edge_type) { return starts_with(edge_type, "has"); }

bool Node::has_label(std::string_view label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

std::string Node::display_name() const {
  if (const auto* tag = properties.find("tagName"); tag && tag->is_text() && !tag->as_text().empty()) {
    return tag->as_text();
  }
  return labels.empty() ? id : labels.front();
}

Graph::Graph(AbstractionLevel level, std::size_t embedding_dim)
    : level_(level), embedding_dim_(embedding_dim) {
  if (embedding_dim == 0) {
    throw Error(ErrorKind::invalid_argument, "embedding dimension must be positive");
  }
}

std::string Graph::mint_id(std::string_view prefix) {
  std::string id;
  do {
    id = std::string(prefix) + std::to_string(minted_++);
  } while (node_index_.count(id) || edge_index_.count(id));
  return id;
}

void Graph::check_embedding(const std::optional<Embedding>& e, std::string_view id) const {
  if (!e) return;
  if (e->size() != embedding_dim_) {
    throw Error(ErrorKind::dimension, "embedding of node '" + std::string(id) + "' has dimension " +
                                          std::to_string(e->size()) + ", graph expects " +
                                          std::to_string(embedding_dim_));
  }
  for (double v : *e) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::invalid_argument,
                  "embedding of node '" + std::string(id) + "' has a non-finite entry");
    }
  }
}

std::string Graph::add_node(Node node) {
  if (node.id.empty()) node.id = mint_id("gen:");
  if (node_index_.count(node.id)) {
    throw Error(ErrorKind::conflict, "duplicate node id '" + node.id + "'");
  }
  if (node.labels.empty()) {
    throw Error(ErrorKind::invalid_argument, "node '" + node.id + "' needs at least one label");
  }
  for (const auto& label : node.labels) {
    if (label.empty() || label.find(':') != std::string::npos) {
      throw Error(ErrorKind::invalid_argument, "node '" + node.id + "' has an invalid label '" + label + "'");
    }
  }
  check_embedding(node.global_embedding, node.id);
  check_embedding(node.local_embedding, node.id);
  node_index_.emplace(node.id, nodes_.size());
  adjacency_.emplace_back();
  nodes_.push_back(std::move(node));
  return nodes_.back().id;
}

std::string Graph::add_edge(Edge edge) {
  if (edge.id.empty()) edge.id = mint_id("gen:");
  if (edge_index_.count(edge.id)) {
    throw Error(ErrorKind::conflict, "duplicate edge id '" + edge.id + "'");
  }
  auto src = node_index_.find(edge.source);
  auto dst = node_index_.find(edge.target);
  if (src == node_index_.end() || dst == node_index_.end()) {
    throw Error(ErrorKind::not_found, "edge '" + edge.id + "' references a missing node");
  }
  if ((edge.kind == EdgeKind::compositional) != is_compositional_type(edge.edge_type)) {
    throw Error(ErrorKind::invalid_argument,
                "edge '" + edge.id + "': kind must be compositional exactly for has-type relationships");
  }
  const auto index = edges_.size();
  edge_index_.emplace(edge.id, index);
  edges_.push_back(std::move(edge));
  const auto& stored = edges_.back();
  auto insert_sorted = [&](std::vector<std::size_t>& list) {
    auto pos = std::lower_bound(list.begin(), list.end(), index, [&](std::size_t a, std::size_t b) {
      return edges_[a].id < edges_[b].id;
    });
    list.insert(pos, index);
  };
  insert_sorted(adjacency_[src->second]);
  if (stored.source != stored.target) insert_sorted(adjacency_[dst->second]);
  return stored.id;
}

bool Graph::has_node(std::string_view id) const { return node_index_.count(std::string(id)) != 0; }
bool Graph::has_edge(std::string_view id) const { return edge_index_.count(std::string(id)) != 0; }

std::size_t Graph::index_of(std::string_view id) const {
  auto it = node_index_.find(std::string(id));
  if (it == node_index_.end()) {
    throw Error(ErrorKind::not_found, "unknown node '" + std::string(id) + "'");
  }
  return it->second;
}

const Node& Graph::node(std::string_view id) const { return nodes_[index_of(id)]; }

const Edge& Graph::edge(std::string_view id) const {
  auto it = edge_index_.find(std::string(id));
  if (it == edge_index_.end()) {
    throw Error(ErrorKind::not_found, "unknown edge '" + std::string(id) + "'");
  }
  return edges_[it->second];
}

std::vector<std::string> Graph::sorted_node_ids() const {
  std::vector<std::string> ids;
  ids.reserve(nodes_.size());
  for (const auto& n : nodes_) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

const std::vector<std::size_t>& Graph::incident_edges(std::string_view id) const {
  return adjacency_[index_of(id)];
}

std::vector<Neighbor> Graph::neighbors(std::string_view id, const std::set<std::string>& exclude) const {
  const auto self = index_of(id);
  std::vector<Neighbor> out;
  for (auto ei : adjacency_[self]) {
    const auto& e = edges_[ei];
    const bool outgoing = e.source == nodes_[self].id;
    const auto& other = outgoing ? e.target : e.source;
    if (exclude.count(other)) continue;
    out.push_back(Neighbor{&nodes_[index_of(other)], &e,
                           outgoing ? Direction::outgoing : Direction::incoming});
  }
  return out;
}

void Graph::set_semantics(std::string_view id, std::optional<std::string> global,
                          std::optional<std::string> local) {
  auto& n = nodes_[index_of(id)];
  n.global_semantic = std::move(global);
  n.local_semantic = std::move(local);
}

void Graph::set_embeddings(std::string_view id, std::optional<Embedding> global,
                           std::optional<Embedding> local) {
  const auto i = index_of(id);
  check_embedding(global, id);
  check_embedding(local, id);
  nodes_[i].global_embedding = std::move(global);
  nodes_[i].local_embedding = std::move(local);
}

void Graph::set_node_property(std::string_view id, const std::string& name, PropertyValue value) {
  nodes_[index_of(id)].properties.set(name, std::move(value));
}

void Graph::validate() const {
  for (const auto& n : nodes_) {
    if (n.labels.empty()) throw Error(ErrorKind::schema, "node '" + n.id + "' has no label");
    check_embedding(n.global_embedding, n.id);
    check_embedding(n.local_embedding, n.id);
  }
  for (const auto& e : edges_) {
    if (!has_node(e.source) || !has_node(e.target)) {
      throw Error(ErrorKind::schema, "dangling edge '" + e.id + "'");
    }
  }
}

GraphSchema schema(const Graph& graph) {
  GraphSchema s;
  for (const auto& n : graph.nodes()) {
    for (const auto& label : n.labels) {
      s.node_labels.insert(label);
      auto& props = s.properties_by_label[label];
      for (const auto& [name, value] : n.properties) props.insert(name);
    }
  }
  for (const auto& e : graph.edges()) {
    s.edge_types.insert(e.edge_type);
    auto& props = s.properties_by_edge_type[e.edge_type];
    for (const auto& [name, value] : e.properties) props.insert(name);
    s.edge_patterns.insert(EdgePattern{graph.node(e.source).primary_label(), e.edge_type,
                                       graph.node(e.target).primary_label()});
  }
  return s;
}

std::string node_context(const Graph& graph, std::string_view id) {
  const auto& n = graph.node(id);
  std::string out = "(";
  for (const auto& label : n.labels) out += ":" + label;
  if (!n.properties.empty()) {
    out += " {";
    bool first = true;
    for (const auto& [name, value] : n.properties) {
      if (!first) out += ", ";
      first = false;
      out += name + ": " + value.to_literal();
    }
    out += "}";
  }
  out += ")";
  if (n.global_semantic) out += "\nGlobal semantic: " + *n.global_semantic;
  if (n.local_semantic) out += "\nLocal semantic: " + *n.local_semantic;
  return out;
}

bool equivalent(const Graph& a, const Graph& b, std::string* why) {
  auto fail = [&](std::string reason) {
    if (why) *why = std::move(reason);
    return false;
  };
  if (a.level() != b.level()) return fail("abstraction level differs");
  if (a.embedding_dim() != b.embedding_dim()) return fail("embedding dimension differs");
  if (a.node_count() != b.node_count()) return fail("node count differs");
  if (a.edge_count() != b.edge_count()) return fail("edge count differs");
  for (const auto& n : a.nodes()) {
    if (!b.has_node(n.id)) return fail("node '" + n.id + "' missing");
    if (!(b.node(n.id) == n)) return fail("node '" + n.id + "' differs");
  }
  for (const auto& e : a.edges()) {
    if (!b.has_edge(e.id)) return fail("edge '" + e.id + "' missing");
    if (!(b.edge(e.id) == e)) return fail("edge '" + e.id + "' differs");
  }
  return true;
}

}  // namespace pidgraph
