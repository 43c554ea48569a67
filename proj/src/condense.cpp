// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/condense.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "pidgraph/errors.hpp"
#include "pidgraph/graphml.hpp"
#include "pidgraph/text.hpp"

namespace pidgraph {

namespace {

using json = nlohmann::json;

LevelRules rules_from_json(const json& j, std::string_view level) {
  LevelRules r;
  if (!j.is_object()) throw Error(ErrorKind::configuration, "rule set section '" + std::string(level) + "' must be an object");
  auto list = [&](const char* key, std::vector<std::string>& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_array()) throw Error(ErrorKind::configuration, std::string("rule set key '") + key + "' must be a list");
    for (const auto& item : v) {
      if (!item.is_string()) throw Error(ErrorKind::configuration, std::string("rule set key '") + key + "' holds a non-string");
      out.push_back(item.get<std::string>());
    }
  };
  for (const auto& [key, value] : j.items()) {
    if (key != "prune" && key != "collapse" && key != "drop_properties") {
      throw Error(ErrorKind::configuration, "unknown rule set key '" + key + "'");
    }
  }
  list("prune", r.prune_labels);
  list("collapse", r.collapse_labels);
  list("drop_properties", r.drop_properties);
  return r;
}

bool any_label_in(const Node& n, const std::vector<std::string>& labels) {
  for (const auto& l : n.labels) {
    if (std::find(labels.begin(), labels.end(), l) != labels.end()) return true;
  }
  return false;
}

bool dropped(std::string_view name, const std::vector<std::string>& patterns) {
  for (const auto& p : patterns) {
    if (glob_match(p, name)) return true;
  }
  return false;
}

PropertyMap filter_properties(const PropertyMap& in, const std::vector<std::string>& patterns) {
  PropertyMap out;
  for (const auto& [name, value] : in) {
    if (!dropped(name, patterns)) out.set(name, value);
  }
  return out;
}

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

enum class Fate { retain, collapse, prune };

class Condenser {
 public:
  Condenser(const Graph& g, AbstractionLevel target, const LevelRules& rules)
      : g_(g), target_(target), rules_(rules) {}

  Graph run() {
    classify();
    compute_representatives();
    Graph out(target_, g_.embedding_dim());
    build_nodes(out);
    map_edges(out);
    bridge(out);
    repair(out);
    return out;
  }

 private:
  std::size_t idx(const std::string& id) const { return index_.at(id); }

  void classify() {
    const auto& nodes = g_.nodes();
    fate_.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      index_.emplace(nodes[i].id, i);
      if (any_label_in(nodes[i], rules_.prune_labels)) fate_[i] = Fate::prune;
      else if (any_label_in(nodes[i], rules_.collapse_labels)) fate_[i] = Fate::collapse;
      else fate_[i] = Fate::retain;
    }
    parent_.assign(nodes.size(), std::nullopt);
    out_ref_.resize(nodes.size());
    for (std::size_t e = 0; e < g_.edges().size(); ++e) {
      const auto& edge = g_.edges()[e];
      const auto s = idx(edge.source);
      const auto t = idx(edge.target);
      if (edge.kind == EdgeKind::compositional) {
        if (!parent_[t] && s != t) parent_[t] = s;
      } else {
        out_ref_[s].push_back(e);
      }
    }
  }

  void compute_representatives() {
    const auto n = g_.nodes().size();
    rep_.assign(n, std::nullopt);
    for (std::size_t i = 0; i < n; ++i) {
      if (fate_[i] == Fate::retain) {
        rep_[i] = i;
      } else if (fate_[i] == Fate::collapse) {
        std::set<std::size_t> seen{i};
        auto p = parent_[i];
        while (p && !seen.count(*p)) {
          seen.insert(*p);
          if (fate_[*p] == Fate::retain) {
            rep_[i] = *p;
            break;
          }
          if (fate_[*p] == Fate::prune) break;
          p = parent_[*p];
        }
      }
    }
  }

  void build_nodes(Graph& out) {
    const auto& nodes = g_.nodes();
    std::vector<Node> kept(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (fate_[i] != Fate::retain) continue;
      kept[i] = nodes[i];
      kept[i].properties = filter_properties(nodes[i].properties, rules_.drop_properties);
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (fate_[i] != Fate::collapse || !rep_[i]) continue;
      auto& target = kept[*rep_[i]];
      for (const auto& [name, value] : nodes[i].properties) {
        if (dropped(name, rules_.drop_properties)) continue;
        target.properties.set_if_absent(nodes[i].primary_label() + "." + name, value);
      }
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (fate_[i] == Fate::retain) out.add_node(std::move(kept[i]));
    }
  }

  static std::pair<std::string, std::string> unordered(const std::string& a, const std::string& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  bool adjacent(const std::string& a, const std::string& b) const { return adjacent_.count(unordered(a, b)) != 0; }

  void add_edge(Graph& out, Edge e) {
    adjacent_.insert(unordered(e.source, e.target));
    out.add_edge(std::move(e));
  }

  std::string mint_edge_id(const Graph& out) {
    std::string id;
    do {
      id = std::string(to_string(target_)) + ":e" + std::to_string(++minted_);
    } while (out.has_edge(id) || g_.has_edge(id));
    return id;
  }

  void add_bridge(Graph& out, const std::string& from, const std::string& to) {
    if (from == to || adjacent(from, to)) return;
    add_edge(out, Edge{mint_edge_id(out), from, to, "CONNECTED_TO", EdgeKind::reference, {}});
  }

  void map_edges(Graph& out) {
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (const auto& e : g_.edges()) {
      const auto rs = rep_[idx(e.source)];
      const auto rt = rep_[idx(e.target)];
      if (!rs || !rt || *rs == *rt) continue;
      const auto& s = g_.nodes()[*rs].id;
      const auto& t = g_.nodes()[*rt].id;
      if (!seen.emplace(s, t, e.edge_type).second) continue;
      add_edge(out, Edge{e.id, s, t, e.edge_type, e.kind, filter_properties(e.properties, rules_.drop_properties)});
    }
  }

  bool orphan(std::size_t i) const { return fate_[i] == Fate::collapse && !rep_[i]; }

  void bridge(Graph& out) {
    const auto& edges = g_.edges();
    const auto n = g_.nodes().size();
    std::vector<std::pair<std::size_t, std::size_t>> directed;

    // Follow reference edges forward through collapsed nodes that have no
    // retained ancestor.
    for (const auto& e : edges) {
      if (e.kind != EdgeKind::reference) continue;
      const auto s = idx(e.source);
      const auto t = idx(e.target);
      if (!rep_[s] || !orphan(t)) continue;
      std::vector<bool> visited(n, false);
      std::vector<std::size_t> stack{t};
      visited[t] = true;
      while (!stack.empty()) {
        const auto cur = stack.back();
        stack.pop_back();
        for (auto ei : out_ref_[cur]) {
          const auto next = idx(edges[ei].target);
          if (visited[next]) continue;
          visited[next] = true;
          if (orphan(next)) {
            stack.push_back(next);
          } else if (rep_[next] && *rep_[next] != *rep_[s]) {
            directed.emplace_back(*rep_[s], *rep_[next]);
          }
        }
      }
    }
    for (const auto& [a, b] : directed) add_bridge(out, g_.nodes()[a].id, g_.nodes()[b].id);

    // Orphan regions whose touching nodes are still not linked, e.g. two
    // streams merging into one pipe, get undirected links.
    UnionFind regions(n);
    for (const auto& e : edges) {
      if (e.kind != EdgeKind::reference) continue;
      const auto s = idx(e.source);
      const auto t = idx(e.target);
      if (orphan(s) && orphan(t)) regions.unite(s, t);
    }
    std::map<std::size_t, std::set<std::size_t>> touching;
    for (const auto& e : edges) {
      if (e.kind != EdgeKind::reference) continue;
      const auto s = idx(e.source);
      const auto t = idx(e.target);
      if (orphan(s) && rep_[t]) touching[regions.find(s)].insert(*rep_[t]);
      if (orphan(t) && rep_[s]) touching[regions.find(t)].insert(*rep_[s]);
    }
    for (const auto& [region, members] : touching) {
      link_components(out, std::vector<std::size_t>(members.begin(), members.end()), true);
    }
  }

  // Links the given retained nodes so that they end up in one component of
  // `out`, considering only edges among themselves when `local` is set.
  void link_components(Graph& out, const std::vector<std::size_t>& members, bool local) {
    if (members.size() < 2) return;
    std::vector<std::string> ids;
    for (auto m : members) ids.push_back(g_.nodes()[m].id);
    std::sort(ids.begin(), ids.end());
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < ids.size(); ++i) pos.emplace(ids[i], i);
    UnionFind uf(ids.size());
    if (local) {
      for (const auto& [a, b] : adjacent_) {
        auto ia = pos.find(a);
        auto ib = pos.find(b);
        if (ia != pos.end() && ib != pos.end()) uf.unite(ia->second, ib->second);
      }
    } else {
      const auto comp = components(out);
      std::unordered_map<std::size_t, std::size_t> first_of;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        auto c = comp.at(ids[i]);
        auto [it, inserted] = first_of.emplace(c, i);
        if (!inserted) uf.unite(it->second, i);
      }
    }
    for (std::size_t i = 1; i < ids.size(); ++i) {
      if (uf.find(i) == i && uf.find(0) != i) {
        add_bridge(out, ids[0], ids[i]);
        uf.unite(0, i);
      }
    }
  }

  static std::unordered_map<std::string, std::size_t> components(const Graph& graph) {
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < graph.nodes().size(); ++i) pos.emplace(graph.nodes()[i].id, i);
    UnionFind uf(graph.nodes().size());
    for (const auto& e : graph.edges()) uf.unite(pos.at(e.source), pos.at(e.target));
    std::unordered_map<std::string, std::size_t> out;
    for (const auto& [id, i] : pos) out.emplace(id, uf.find(i));
    return out;
  }

  // Retained nodes connected in the input stay connected in the output.
  void repair(Graph& out) {
    const auto before = components(g_);
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < g_.nodes().size(); ++i) {
      if (fate_[i] == Fate::retain) groups[before.at(g_.nodes()[i].id)].push_back(i);
    }
    for (const auto& [comp, members] : groups) link_components(out, members, false);
  }

  const Graph& g_;
  AbstractionLevel target_;
  const LevelRules& rules_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Fate> fate_;
  std::vector<std::optional<std::size_t>> parent_;
  std::vector<std::optional<std::size_t>> rep_;
  std::vector<std::vector<std::size_t>> out_ref_;
  std::set<std::pair<std::string, std::string>> adjacent_;
  std::size_t minted_ = 0;
};

}  // namespace

CondensationRuleSet::CondensationRuleSet(LevelRules process, LevelRules conceptual)
    : process_(std::move(process)), conceptual_(std::move(conceptual)) {
  check();
}

void CondensationRuleSet::check() const {
  std::set<std::string> pruned;
  std::set<std::string> collapsed;
  for (const auto* r : {&process_, &conceptual_}) {
    pruned.insert(r->prune_labels.begin(), r->prune_labels.end());
    collapsed.insert(r->collapse_labels.begin(), r->collapse_labels.end());
  }
  for (const auto& l : pruned) {
    if (collapsed.count(l)) {
      throw Error(ErrorKind::configuration, "label '" + l + "' is both pruned and collapsed");
    }
  }
}

CondensationRuleSet CondensationRuleSet::defaults() {
  LevelRules process;
  process.prune_labels = {"Label", "ConnectionPoint"};
  process.collapse_labels = {"PipingNetworkSystem", "PipingNetworkSegment", "Pipe"};
  process.drop_properties = {"uri", "*URI", "position_*", "dexpiId"};
  LevelRules conceptual;
  conceptual.collapse_labels = {"Nozzle", "Chamber", "ProcessSignalGeneratingFunction",
                                "ActuatingFunction", "ControlledActuator"};
  return CondensationRuleSet(std::move(process), std::move(conceptual));
}

CondensationRuleSet CondensationRuleSet::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::configuration, std::string("rule set is not valid JSON: ") + ex.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::configuration, "rule set must be a JSON object");
  LevelRules process;
  LevelRules conceptual;
  for (const auto& [key, value] : j.items()) {
    if (key == "process") process = rules_from_json(value, key);
    else if (key == "conceptual") conceptual = rules_from_json(value, key);
    else if (key != "note") throw Error(ErrorKind::configuration, "unknown rule set level '" + key + "'");
  }
  return CondensationRuleSet(std::move(process), std::move(conceptual));
}

CondensationRuleSet CondensationRuleSet::load(const std::filesystem::path& path) {
  return from_json(read_file(path));
}

const LevelRules& CondensationRuleSet::rules_for(AbstractionLevel target) const {
  if (target == AbstractionLevel::process) return process_;
  if (target == AbstractionLevel::conceptual) return conceptual_;
  throw Error(ErrorKind::invalid_transition, "no rules lead to the complete level");
}

Graph condense(const Graph& graph, AbstractionLevel target, const CondensationRuleSet& rules) {
  if (static_cast<int>(target) <= static_cast<int>(graph.level())) {
    throw Error(ErrorKind::invalid_transition, "cannot condense a " + std::string(to_string(graph.level())) +
                                                   " graph to the " + std::string(to_string(target)) + " level");
  }
  Graph current = graph;
  for (int level = static_cast<int>(graph.level()) + 1; level <= static_cast<int>(target); ++level) {
    const auto step = static_cast<AbstractionLevel>(level);
    current = Condenser(current, step, rules.rules_for(step)).run();
  }
  return current;
}

bool reachability_equivalent(const Graph& a, const Graph& b, std::string_view node_class) {
  auto component_of = [](const Graph& g) {
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < g.nodes().size(); ++i) pos.emplace(g.nodes()[i].id, i);
    UnionFind uf(g.nodes().size());
    for (const auto& e : g.edges()) uf.unite(pos.at(e.source), pos.at(e.target));
    std::unordered_map<std::string, std::size_t> comp;
    for (const auto& [id, i] : pos) comp.emplace(id, uf.find(i));
    return comp;
  };
  std::set<std::string> members;
  for (const auto* g : {&a, &b}) {
    for (const auto& n : g->nodes()) {
      if (n.has_label(node_class)) members.insert(n.id);
    }
  }
  const auto ca = component_of(a);
  const auto cb = component_of(b);
  auto connected = [](const std::unordered_map<std::string, std::size_t>& comp, const std::string& x,
                      const std::string& y) {
    auto ix = comp.find(x);
    auto iy = comp.find(y);
    return ix != comp.end() && iy != comp.end() && ix->second == iy->second;
  };
  const std::vector<std::string> ids(members.begin(), members.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      if (connected(ca, ids[i], ids[j]) != connected(cb, ids[i], ids[j])) return false;
    }
  }
  return true;
}

}  // namespace pidgraph
