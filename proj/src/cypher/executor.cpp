// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/cypher/executor.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "pidgraph/cypher/parser.hpp"
#include "pidgraph/errors.hpp"
#include "pidgraph/text.hpp"

namespace pidgraph::cypher {

namespace {

using Path = std::vector<const Edge*>;
using Val = std::variant<std::monostate, PropertyValue, const Node*, const Edge*, Path>;

struct Binding {
  std::map<std::string, Val> vars;
  std::vector<std::string> node_seq;
  std::vector<std::string> edge_seq;
};

[[noreturn]] void type_error(const Expr& at, const std::string& msg) {
  throw PositionedError(ErrorKind::query_semantic, "query error: " + msg, at.line, at.column);
}

bool is_null(const Val& v) { return std::holds_alternative<std::monostate>(v); }

const PropertyValue* as_prop(const Val& v) { return std::get_if<PropertyValue>(&v); }

Val boolean(bool b) { return Val(PropertyValue(b)); }

// Three-valued truth: nullopt is null.
std::optional<bool> truth(const Val& v, const Expr& at) {
  if (is_null(v)) return std::nullopt;
  const auto* p = as_prop(v);
  if (!p || !p->is_boolean()) type_error(at, "expected a boolean operand");
  return p->as_boolean();
}

std::optional<bool> prop_equal(const PropertyValue& a, const PropertyValue& b) {
  if (a.is_numeric() && b.is_numeric()) {
    if (a.is_integer() && b.is_integer()) return a.as_integer() == b.as_integer();
    return a.numeric_value() == b.numeric_value();
  }
  if (a.is_list() && b.is_list()) {
    const auto& la = a.as_list();
    const auto& lb = b.as_list();
    if (la.size() != lb.size()) return false;
    for (std::size_t i = 0; i < la.size(); ++i) {
      auto r = prop_equal(la[i], lb[i]);
      if (!r || !*r) return r;
    }
    return true;
  }
  if (a.type() != b.type()) return false;
  return a == b;
}

std::optional<bool> values_equal(const Val& a, const Val& b) {
  if (is_null(a) || is_null(b)) return std::nullopt;
  if (a.index() != b.index()) return false;
  if (const auto* pa = as_prop(a)) return prop_equal(*pa, *as_prop(b));
  if (const auto* na = std::get_if<const Node*>(&a)) return *na == std::get<const Node*>(b);
  if (const auto* ea = std::get_if<const Edge*>(&a)) return *ea == std::get<const Edge*>(b);
  return std::get<Path>(a) == std::get<Path>(b);
}

std::optional<int> prop_order(const PropertyValue& a, const PropertyValue& b) {
  if (a.is_numeric() && b.is_numeric()) {
    if (a.is_integer() && b.is_integer()) {
      return a.as_integer() < b.as_integer() ? -1 : (a.as_integer() > b.as_integer() ? 1 : 0);
    }
    const double x = a.numeric_value();
    const double y = b.numeric_value();
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (a.is_text() && b.is_text()) {
    const int c = a.as_text().compare(b.as_text());
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  if (a.is_boolean() && b.is_boolean()) return static_cast<int>(a.as_boolean()) - static_cast<int>(b.as_boolean());
  return std::nullopt;
}

std::string key_of(const Val& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "N"; }
    std::string operator()(const PropertyValue& p) const { return "P" + p.to_literal(); }
    std::string operator()(const Node* n) const { return "V" + json_quote(n->id); }
    std::string operator()(const Edge* e) const { return "E" + json_quote(e->id); }
    std::string operator()(const Path& p) const {
      std::string out = "L";
      for (const auto* e : p) out += json_quote(e->id);
      return out;
    }
  };
  return std::visit(Visitor{}, v);
}

class Evaluator {
 public:
  explicit Evaluator(const Binding& b) : binding_(b) {}

  Val eval(const Expr& e) const {
    switch (e.kind) {
      case ExprKind::null_literal: return {};
      case ExprKind::literal: return e.value;
      case ExprKind::list: {
        PropertyValue::List items;
        for (const auto& c : e.children) {
          auto v = eval(c);
          const auto* p = as_prop(v);
          if (!p || p->is_list()) type_error(c, "list elements must be scalar values");
          items.push_back(*p);
        }
        try {
          return PropertyValue(std::move(items));
        } catch (const Error&) {
          type_error(e, "list elements must share one type");
        }
      }
      case ExprKind::variable: return binding_.vars.at(e.name);
      case ExprKind::property: {
        auto base = eval(e.children[0]);
        if (is_null(base)) return {};
        const PropertyMap* props = nullptr;
        if (auto* n = std::get_if<const Node*>(&base)) props = &(*n)->properties;
        if (auto* r = std::get_if<const Edge*>(&base)) props = &(*r)->properties;
        if (!props) type_error(e, "property access needs a node or relationship");
        const auto* found = props->find(e.name);
        return found ? Val(*found) : Val{};
      }
      case ExprKind::label_test: {
        auto base = eval(e.children[0]);
        if (is_null(base)) return {};
        const auto* n = std::get<const Node*>(base);
        for (const auto& l : e.labels) {
          if (!n->has_label(l)) return boolean(false);
        }
        return boolean(true);
      }
      case ExprKind::compare: return compare(e);
      case ExprKind::logical_and: {
        auto a = truth(eval(e.children[0]), e.children[0]);
        if (a && !*a) return boolean(false);
        auto b = truth(eval(e.children[1]), e.children[1]);
        if (b && !*b) return boolean(false);
        return a && b ? boolean(true) : Val{};
      }
      case ExprKind::logical_or: {
        auto a = truth(eval(e.children[0]), e.children[0]);
        if (a && *a) return boolean(true);
        auto b = truth(eval(e.children[1]), e.children[1]);
        if (b && *b) return boolean(true);
        return a && b ? boolean(false) : Val{};
      }
      case ExprKind::logical_xor: {
        auto a = truth(eval(e.children[0]), e.children[0]);
        auto b = truth(eval(e.children[1]), e.children[1]);
        if (!a || !b) return {};
        return boolean(*a != *b);
      }
      case ExprKind::logical_not: {
        auto a = truth(eval(e.children[0]), e.children[0]);
        return a ? boolean(!*a) : Val{};
      }
      case ExprKind::is_null: {
        const bool null = is_null(eval(e.children[0]));
        return boolean(e.negated ? !null : null);
      }
      case ExprKind::string_match: {
        auto a = eval(e.children[0]);
        auto b = eval(e.children[1]);
        const auto* pa = as_prop(a);
        const auto* pb = as_prop(b);
        if (!pa || !pb || !pa->is_text() || !pb->is_text()) return {};
        const auto& s = pa->as_text();
        const auto& t = pb->as_text();
        if (e.op == "CONTAINS") return boolean(s.find(t) != std::string::npos);
        if (e.op == "STARTS WITH") return boolean(starts_with(s, t));
        return boolean(s.size() >= t.size() && s.compare(s.size() - t.size(), t.size(), t) == 0);
      }
      case ExprKind::in_list: {
        auto needle = eval(e.children[0]);
        auto hay = eval(e.children[1]);
        if (is_null(hay)) return {};
        const auto* list = as_prop(hay);
        if (!list || !list->is_list()) type_error(e.children[1], "IN needs a list");
        if (list->as_list().empty()) return boolean(false);
        if (is_null(needle)) return {};
        bool unknown = false;
        for (const auto& item : list->as_list()) {
          auto r = values_equal(needle, Val(item));
          if (r && *r) return boolean(true);
          if (!r) unknown = true;
        }
        return unknown ? Val{} : boolean(false);
      }
      case ExprKind::function: return call(e);
      case ExprKind::count_star: type_error(e, "count(*) is only valid as a return item");
    }
    return {};
  }

 private:
  Val compare(const Expr& e) const {
    auto a = eval(e.children[0]);
    auto b = eval(e.children[1]);
    if (e.op == "=" || e.op == "<>") {
      auto r = values_equal(a, b);
      if (!r) return {};
      return boolean(e.op == "=" ? *r : !*r);
    }
    const auto* pa = as_prop(a);
    const auto* pb = as_prop(b);
    if (!pa || !pb) return {};
    auto c = prop_order(*pa, *pb);
    if (!c) return {};
    if (e.op == "<") return boolean(*c < 0);
    if (e.op == ">") return boolean(*c > 0);
    if (e.op == "<=") return boolean(*c <= 0);
    return boolean(*c >= 0);
  }

  Val call(const Expr& e) const {
    const auto name = to_lower(e.name);
    if (name == "count") type_error(e, "count() is only valid as a return item");
    auto arg = eval(e.children[0]);
    if (is_null(arg)) return {};
    const auto* p = as_prop(arg);
    if (name == "tolower" || name == "toupper") {
      if (!p || !p->is_text()) type_error(e, e.name + "() needs a string");
      std::string s = p->as_text();
      for (auto& c : s) {
        c = static_cast<char>(name == "tolower" ? std::tolower(static_cast<unsigned char>(c))
                                                : std::toupper(static_cast<unsigned char>(c)));
      }
      return PropertyValue(std::move(s));
    }
    if (name == "tostring") {
      if (!p || p->is_list()) type_error(e, "toString() needs a scalar");
      return PropertyValue(p->to_display());
    }
    if (name == "labels") {
      const auto* n = std::get_if<const Node*>(&arg);
      if (!n) type_error(e, "labels() needs a node");
      PropertyValue::List out;
      for (const auto& l : (*n)->labels) out.emplace_back(l);
      return PropertyValue(std::move(out));
    }
    if (name == "type") {
      const auto* r = std::get_if<const Edge*>(&arg);
      if (!r) type_error(e, "type() needs a relationship");
      return PropertyValue((*r)->edge_type);
    }
    if (name == "id" || name == "elementid") {
      if (const auto* n = std::get_if<const Node*>(&arg)) return PropertyValue((*n)->id);
      if (const auto* r = std::get_if<const Edge*>(&arg)) return PropertyValue((*r)->id);
      type_error(e, e.name + "() needs a node or relationship");
    }
    // size
    if (const auto* path = std::get_if<Path>(&arg)) return PropertyValue(static_cast<std::int64_t>(path->size()));
    if (p && p->is_list()) return PropertyValue(static_cast<std::int64_t>(p->as_list().size()));
    if (p && p->is_text()) return PropertyValue(static_cast<std::int64_t>(p->as_text().size()));
    type_error(e, "size() needs a string or list");
  }

  const Binding& binding_;
};

class Matcher {
 public:
  Matcher(const Graph& g, const ExecuteOptions& opts) : graph_(g), opts_(opts) {}

  std::vector<Binding> clause(const MatchClause& m, std::vector<Binding> input) {
    std::vector<Binding> out;
    for (auto& b : input) {
      std::vector<Binding> partial{std::move(b)};
      std::vector<std::unordered_set<const Edge*>> used{{}};
      for (const auto& p : m.patterns) {
        std::vector<Binding> next;
        std::vector<std::unordered_set<const Edge*>> next_used;
        for (std::size_t i = 0; i < partial.size(); ++i) {
          path(p, partial[i], used[i], next, next_used);
        }
        partial = std::move(next);
        used = std::move(next_used);
      }
      for (auto& r : partial) {
        if (m.where) {
          auto v = Evaluator(r).eval(*m.where);
          auto t = truth(v, *m.where);
          if (!t || !*t) continue;
        }
        out.push_back(std::move(r));
      }
    }
    return out;
  }

 private:
  bool node_ok(const NodePattern& np, const Node& n) const {
    for (const auto& l : np.labels) {
      if (!n.has_label(l)) return false;
    }
    return props_ok(np.properties, n.properties);
  }

  bool props_ok(const std::vector<std::pair<std::string, Expr>>& want, const PropertyMap& have) const {
    static const Binding empty;
    for (const auto& [key, expr] : want) {
      const auto* v = have.find(key);
      if (!v) return false;
      auto r = values_equal(Val(*v), Evaluator(empty).eval(expr));
      if (!r || !*r) return false;
    }
    return true;
  }

  bool edge_ok(const RelPattern& rp, const Edge& e) const {
    if (!rp.types.empty() && std::find(rp.types.begin(), rp.types.end(), e.edge_type) == rp.types.end()) {
      return false;
    }
    return props_ok(rp.properties, e.properties);
  }

  // Returns the far endpoint when `e` can be traversed from `from` along `dir`.
  const std::string* step(const Edge& e, const std::string& from, RelDirection dir) const {
    switch (dir) {
      case RelDirection::out: return e.source == from ? &e.target : nullptr;
      case RelDirection::in: return e.target == from ? &e.source : nullptr;
      case RelDirection::any: return e.source == from ? &e.target : &e.source;
    }
    return nullptr;
  }

  // Binds node variable `var` to `n`; false when it conflicts.
  static bool bind_node(Binding& b, const std::optional<std::string>& var, const Node& n) {
    if (!var) return true;
    auto it = b.vars.find(*var);
    if (it == b.vars.end()) {
      b.vars.emplace(*var, &n);
      return true;
    }
    const auto* bound = std::get_if<const Node*>(&it->second);
    return bound && *bound == &n;
  }

  void path(const PathPattern& p, const Binding& base, const std::unordered_set<const Edge*>& used,
            std::vector<Binding>& out, std::vector<std::unordered_set<const Edge*>>& out_used) {
    const auto& first = p.nodes[0];
    std::vector<const Node*> starts;
    if (first.variable && base.vars.count(*first.variable)) {
      starts.push_back(std::get<const Node*>(base.vars.at(*first.variable)));
    } else {
      for (const auto& id : sorted_ids()) starts.push_back(&graph_.node(id));
    }
    for (const auto* n : starts) {
      if (!node_ok(first, *n)) continue;
      Binding b = base;
      if (!bind_node(b, first.variable, *n)) continue;
      b.node_seq.push_back(n->id);
      auto u = used;
      extend(p, 0, *n, b, u, out, out_used);
    }
  }

  void extend(const PathPattern& p, std::size_t rel, const Node& at, Binding& b,
              std::unordered_set<const Edge*>& used, std::vector<Binding>& out,
              std::vector<std::unordered_set<const Edge*>>& out_used) {
    if (rel == p.rels.size()) {
      out.push_back(b);
      out_used.push_back(used);
      return;
    }
    const auto& rp = p.rels[rel];
    const auto& np = p.nodes[rel + 1];
    auto arrive = [&](const Node& dest, Val rel_value, const std::vector<const Edge*>& edges) {
      if (!node_ok(np, dest)) return;
      Binding nb = b;
      if (!bind_node(nb, np.variable, dest)) return;
      if (rp.variable) nb.vars.emplace(*rp.variable, std::move(rel_value));
      nb.node_seq.push_back(dest.id);
      for (const auto* e : edges) nb.edge_seq.push_back(e->id);
      auto nu = used;
      for (const auto* e : edges) nu.insert(e);
      extend(p, rel + 1, dest, nb, nu, out, out_used);
    };
    if (!rp.variable_length) {
      for (auto ei : graph_.incident_edges(at.id)) {
        const auto& e = graph_.edges()[ei];
        if (used.count(&e) || !edge_ok(rp, e)) continue;
        const auto* far = step(e, at.id, rp.direction);
        if (!far) continue;
        arrive(graph_.node(*far), Val(&e), {&e});
      }
      return;
    }
    const std::size_t max = rp.max_hops ? *rp.max_hops : opts_.hop_ceiling;
    Path trail;
    std::unordered_set<const Edge*> in_trail;
    walk(rp, at, max, trail, in_trail, used, arrive);
  }

  template <typename Arrive>
  void walk(const RelPattern& rp, const Node& at, std::size_t max, Path& trail,
            std::unordered_set<const Edge*>& in_trail, const std::unordered_set<const Edge*>& used,
            Arrive& arrive) {
    if (trail.size() >= rp.min_hops) arrive(at, Val(trail), trail);
    if (trail.size() == max) return;
    for (auto ei : graph_.incident_edges(at.id)) {
      const auto& e = graph_.edges()[ei];
      if (used.count(&e) || in_trail.count(&e) || !edge_ok(rp, e)) continue;
      const auto* far = step(e, at.id, rp.direction);
      if (!far) continue;
      trail.push_back(&e);
      in_trail.insert(&e);
      walk(rp, graph_.node(*far), max, trail, in_trail, used, arrive);
      in_trail.erase(&e);
      trail.pop_back();
    }
  }

  const std::vector<std::string>& sorted_ids() {
    if (ids_.empty()) ids_ = graph_.sorted_node_ids();
    return ids_;
  }

  const Graph& graph_;
  const ExecuteOptions& opts_;
  std::vector<std::string> ids_;
};

NodeValue node_value(const Node& n) { return NodeValue{n.id, n.labels, n.properties}; }

EdgeValue edge_value(const Edge& e) { return EdgeValue{e.id, e.edge_type, e.source, e.target, e.properties}; }

Cell to_cell(const Val& v) {
  struct Visitor {
    Cell operator()(std::monostate) const { return {}; }
    Cell operator()(const PropertyValue& p) const { return p; }
    Cell operator()(const Node* n) const { return node_value(*n); }
    Cell operator()(const Edge* e) const { return edge_value(*e); }
    Cell operator()(const Path& p) const {
      EdgeList out;
      for (const auto* e : p) out.push_back(edge_value(*e));
      return out;
    }
  };
  return std::visit(Visitor{}, v);
}

void check_hops(const Query& q, const ExecuteOptions& opts) {
  for (const auto& m : q.matches) {
    for (const auto& p : m.patterns) {
      for (const auto& r : p.rels) {
        if (!r.variable_length) continue;
        const auto bound = r.max_hops ? *r.max_hops : r.min_hops;
        if (bound > opts.hop_ceiling) {
          throw Error(ErrorKind::hop_ceiling, "variable-length relationship allows " + std::to_string(bound) +
                                                  " hops, ceiling is " + std::to_string(opts.hop_ceiling));
        }
      }
    }
  }
}

bool schema_warnings(const Query& q, const GraphSchema& s, std::vector<std::string>& warnings) {
  bool unmatched = false;
  std::set<std::string> seen;
  auto warn = [&](const std::string& w) {
    if (seen.insert(w).second) warnings.push_back(w);
  };
  for (const auto& m : q.matches) {
    for (const auto& p : m.patterns) {
      for (const auto& n : p.nodes) {
        for (const auto& l : n.labels) {
          if (!s.node_labels.count(l)) {
            warn("unknown label '" + l + "'");
            unmatched = true;
          }
        }
      }
      for (const auto& r : p.rels) {
        bool any_known = r.types.empty();
        for (const auto& t : r.types) {
          if (s.edge_types.count(t)) {
            any_known = true;
          } else {
            warn("unknown relationship type '" + t + "'");
          }
        }
        const bool zero_ok = r.variable_length && r.min_hops == 0;
        if (!any_known && !zero_ok) unmatched = true;
      }
    }
  }
  return unmatched;
}

}  // namespace

ResultTable execute_query(const Query& query, const Graph& graph, const ExecuteOptions& options) {
  if (options.hop_ceiling == 0) throw Error(ErrorKind::configuration, "hop ceiling must be positive");
  check_hops(query, options);
  ResultTable table;
  for (const auto& item : query.items) table.columns.push_back(item.column);

  std::vector<Binding> bindings;
  if (!schema_warnings(query, schema(graph), table.warnings)) {
    Matcher matcher(graph, options);
    bindings.emplace_back();
    for (const auto& m : query.matches) bindings = matcher.clause(m, std::move(bindings));
    std::sort(bindings.begin(), bindings.end(), [](const Binding& a, const Binding& b) {
      if (a.node_seq != b.node_seq) return a.node_seq < b.node_seq;
      return a.edge_seq < b.edge_seq;
    });
  }

  const bool aggregate =
      std::any_of(query.items.begin(), query.items.end(), [](const ReturnItem& i) { return i.expr.is_aggregate(); });

  std::vector<std::vector<Val>> rows;
  if (!aggregate) {
    for (const auto& b : bindings) {
      Evaluator ev(b);
      std::vector<Val> row;
      for (const auto& item : query.items) row.push_back(ev.eval(item.expr));
      rows.push_back(std::move(row));
    }
  } else {
    struct Group {
      std::vector<Val> keys;
      std::vector<std::int64_t> counts;
      std::vector<std::set<std::string>> distinct;
    };
    std::vector<Group> groups;
    std::unordered_map<std::string, std::size_t> index;
    const auto n = query.items.size();
    for (const auto& b : bindings) {
      Evaluator ev(b);
      std::vector<Val> keys(n);
      std::string key;
      for (std::size_t i = 0; i < n; ++i) {
        if (query.items[i].expr.is_aggregate()) continue;
        keys[i] = ev.eval(query.items[i].expr);
        key += key_of(keys[i]) + "\x1f";
      }
      auto [it, fresh] = index.emplace(key, groups.size());
      if (fresh) groups.push_back(Group{std::move(keys), std::vector<std::int64_t>(n, 0),
                                        std::vector<std::set<std::string>>(n)});
      auto& g = groups[it->second];
      for (std::size_t i = 0; i < n; ++i) {
        const auto& e = query.items[i].expr;
        if (!e.is_aggregate()) continue;
        if (e.kind == ExprKind::count_star) {
          ++g.counts[i];
          continue;
        }
        auto v = ev.eval(e.children[0]);
        if (is_null(v)) continue;
        if (e.distinct) {
          g.distinct[i].insert(key_of(v));
        } else {
          ++g.counts[i];
        }
      }
    }
    const bool all_aggregate =
        std::all_of(query.items.begin(), query.items.end(), [](const ReturnItem& i) { return i.expr.is_aggregate(); });
    if (groups.empty() && all_aggregate) {
      groups.push_back(Group{std::vector<Val>(n), std::vector<std::int64_t>(n, 0), std::vector<std::set<std::string>>(n)});
    }
    for (auto& g : groups) {
      std::vector<Val> row;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& e = query.items[i].expr;
        if (!e.is_aggregate()) {
          row.push_back(g.keys[i]);
        } else {
          const auto c = e.distinct ? static_cast<std::int64_t>(g.distinct[i].size()) : g.counts[i];
          row.emplace_back(PropertyValue(c));
        }
      }
      rows.push_back(std::move(row));
    }
  }

  if (query.distinct) {
    std::unordered_set<std::string> seen;
    std::vector<std::vector<Val>> kept;
    for (auto& row : rows) {
      std::string key;
      for (const auto& v : row) key += key_of(v) + "\x1f";
      if (seen.insert(key).second) kept.push_back(std::move(row));
    }
    rows = std::move(kept);
  }
  if (query.limit && rows.size() > static_cast<std::size_t>(*query.limit)) {
    rows.resize(static_cast<std::size_t>(*query.limit));
  }
  for (const auto& row : rows) {
    std::vector<Cell> cells;
    for (const auto& v : row) cells.push_back(to_cell(v));
    table.rows.push_back(std::move(cells));
  }
  return table;
}

ResultTable run_query(std::string_view text, const Graph& graph, const ExecuteOptions& options) {
  return execute_query(parse_query(text), graph, options);
}

namespace {

std::string render_props(const PropertyMap& props) {
  if (props.empty()) return "";
  std::vector<std::string> parts;
  for (const auto& [k, v] : props) parts.push_back(k + ": " + v.to_literal());
  return " {" + join(parts, ", ") + "}";
}

std::string render_edge(const EdgeValue& e) {
  return "[" + e.id + ":" + e.edge_type + " " + e.source + "->" + e.target + render_props(e.properties) + "]";
}

}  // namespace

std::string render_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "null"; }
    std::string operator()(const PropertyValue& p) const { return p.to_literal(); }
    std::string operator()(const NodeValue& n) const {
      std::string out = "(" + n.id;
      for (const auto& l : n.labels) out += ":" + l;
      return out + render_props(n.properties) + ")";
    }
    std::string operator()(const EdgeValue& e) const { return render_edge(e); }
    std::string operator()(const EdgeList& list) const {
      std::vector<std::string> parts;
      for (const auto& e : list) parts.push_back(render_edge(e));
      return "[" + join(parts, ", ") + "]";
    }
  };
  return std::visit(Visitor{}, cell);
}

std::string render_table(const ResultTable& table) {
  std::vector<std::vector<std::string>> text;
  std::vector<std::size_t> width;
  for (const auto& c : table.columns) width.push_back(c.size());
  for (const auto& row : table.rows) {
    std::vector<std::string> r;
    for (std::size_t i = 0; i < row.size(); ++i) {
      r.push_back(render_cell(row[i]));
      width[i] = std::max(width[i], r.back().size());
    }
    text.push_back(std::move(r));
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out = "|";
    for (std::size_t i = 0; i < cells.size(); ++i) out += fmt::format(" {:<{}} |", cells[i], width[i]);
    return out + "\n";
  };
  std::string out = line(table.columns);
  out += "|";
  for (auto w : width) out += std::string(w + 2, '-') + "|";
  out += "\n";
  for (const auto& r : text) out += line(r);
  out += fmt::format("({} row{})\n", table.rows.size(), table.rows.size() == 1 ? "" : "s");
  for (const auto& w : table.warnings) out += "warning: " + w + "\n";
  return out;
}

namespace {

nlohmann::json prop_json(const PropertyValue& p) {
  if (p.is_text()) return p.as_text();
  if (p.is_integer()) return p.as_integer();
  if (p.is_number()) return p.as_number();
  if (p.is_boolean()) return p.as_boolean();
  auto arr = nlohmann::json::array();
  for (const auto& item : p.as_list()) arr.push_back(prop_json(item));
  return arr;
}

nlohmann::json map_json(const PropertyMap& props) {
  auto obj = nlohmann::json::object();
  for (const auto& [k, v] : props) obj[k] = prop_json(v);
  return obj;
}

nlohmann::json edge_json(const EdgeValue& e) {
  return {{"id", e.id}, {"type", e.edge_type}, {"source", e.source}, {"target", e.target},
          {"properties", map_json(e.properties)}};
}

}  // namespace

nlohmann::json to_json(const Cell& cell) {
  struct Visitor {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(const PropertyValue& p) const { return prop_json(p); }
    nlohmann::json operator()(const NodeValue& n) const {
      return {{"id", n.id}, {"labels", n.labels}, {"properties", map_json(n.properties)}};
    }
    nlohmann::json operator()(const EdgeValue& e) const { return edge_json(e); }
    nlohmann::json operator()(const EdgeList& list) const {
      auto arr = nlohmann::json::array();
      for (const auto& e : list) arr.push_back(edge_json(e));
      return arr;
    }
  };
  return std::visit(Visitor{}, cell);
}

nlohmann::json to_json(const ResultTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    auto r = nlohmann::json::array();
    for (const auto& c : row) r.push_back(to_json(c));
    rows.push_back(std::move(r));
  }
  return {{"columns", table.columns}, {"rows", std::move(rows)}, {"warnings", table.warnings}};
}

std::string render_schema_context(const GraphSchema& schema) {
  std::string out = "Graph schema\n";
  if (schema.empty()) return out;
  out += "Node labels and properties:\n";
  for (const auto& label : schema.node_labels) {
    out += "- " + label;
    auto it = schema.properties_by_label.find(label);
    if (it != schema.properties_by_label.end() && !it->second.empty()) {
      out += " {" + join(std::vector<std::string>(it->second.begin(), it->second.end()), ", ") + "}";
    }
    out += "\n";
  }
  out += "Relationship types:\n";
  for (const auto& type : schema.edge_types) {
    out += "- " + type;
    auto it = schema.properties_by_edge_type.find(type);
    if (it != schema.properties_by_edge_type.end() && !it->second.empty()) {
      out += " {" + join(std::vector<std::string>(it->second.begin(), it->second.end()), ", ") + "}";
    }
    out += "\n";
  }
  out += "Relationship patterns:\n";
  for (const auto& p : schema.edge_patterns) {
    out += "- (:" + p.source_label + ")-[:" + p.edge_type + "]->(:" + p.target_label + ")\n";
  }
  return out;
}

}  // namespace pidgraph::cypher
