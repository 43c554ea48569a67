// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/cypher/ast.hpp"

#include "pidgraph/text.hpp"

namespace pidgraph::cypher {

bool Expr::is_aggregate() const {
  if (kind == ExprKind::count_star) return true;
  if (kind == ExprKind::function && to_lower(name) == "count") return true;
  for (const auto& c : children) {
    if (c.is_aggregate()) return true;
  }
  return false;
}

namespace {

std::string props_sexpr(const std::vector<std::pair<std::string, Expr>>& props) {
  if (props.empty()) return "";
  std::string out = " (props";
  for (const auto& [k, v] : props) out += " (" + k + " " + to_sexpr(v) + ")";
  return out + ")";
}

std::string direction_name(RelDirection d) {
  switch (d) {
    case RelDirection::out: return "out";
    case RelDirection::in: return "in";
    case RelDirection::any: return "any";
  }
  return "any";
}

}  // namespace

std::string to_sexpr(const Expr& e) {
  auto children = [&](std::size_t from = 0) {
    std::string out;
    for (std::size_t i = from; i < e.children.size(); ++i) out += " " + to_sexpr(e.children[i]);
    return out;
  };
  switch (e.kind) {
    case ExprKind::null_literal: return "null";
    case ExprKind::literal: return e.value.to_literal();
    case ExprKind::list: return "(list" + children() + ")";
    case ExprKind::variable: return "(var " + e.name + ")";
    case ExprKind::property: return "(prop " + to_sexpr(e.children[0]) + " " + e.name + ")";
    case ExprKind::label_test: return "(has-labels " + to_sexpr(e.children[0]) + " " + join(e.labels, " ") + ")";
    case ExprKind::compare: return "(" + e.op + children() + ")";
    case ExprKind::logical_and: return "(and" + children() + ")";
    case ExprKind::logical_or: return "(or" + children() + ")";
    case ExprKind::logical_xor: return "(xor" + children() + ")";
    case ExprKind::logical_not: return "(not" + children() + ")";
    case ExprKind::is_null: return std::string(e.negated ? "(is-not-null" : "(is-null") + children() + ")";
    case ExprKind::string_match: {
      std::string op = to_lower(e.op);
      for (auto& c : op) {
        if (c == ' ') c = '-';
      }
      return "(" + op + children() + ")";
    }
    case ExprKind::in_list: return "(in" + children() + ")";
    case ExprKind::function:
      return "(call " + e.name + (e.distinct ? " distinct" : "") + children() + ")";
    case ExprKind::count_star: return "(count *)";
  }
  return "?";
}

std::string to_sexpr(const Query& q) {
  std::string out = "(query";
  for (const auto& m : q.matches) {
    out += " (match";
    for (const auto& p : m.patterns) {
      out += " (path";
      for (std::size_t i = 0; i < p.nodes.size(); ++i) {
        const auto& n = p.nodes[i];
        out += " (node " + n.variable.value_or("_");
        if (!n.labels.empty()) out += " (labels " + join(n.labels, " ") + ")";
        out += props_sexpr(n.properties) + ")";
        if (i < p.rels.size()) {
          const auto& r = p.rels[i];
          out += " (rel " + r.variable.value_or("_") + " " + direction_name(r.direction);
          if (!r.types.empty()) out += " (types " + join(r.types, " ") + ")";
          if (r.variable_length) {
            out += " (hops " + std::to_string(r.min_hops) + " " +
                   (r.max_hops ? std::to_string(*r.max_hops) : std::string("*")) + ")";
          }
          out += props_sexpr(r.properties) + ")";
        }
      }
      out += ")";
    }
    if (m.where) out += " (where " + to_sexpr(*m.where) + ")";
    out += ")";
  }
  out += " (return";
  if (q.distinct) out += " distinct";
  for (const auto& item : q.items) out += " (item " + to_sexpr(item.expr) + " " + json_quote(item.column) + ")";
  out += ")";
  if (q.limit) out += " (limit " + std::to_string(*q.limit) + ")";
  return out + ")";
}

}  // namespace pidgraph::cypher
