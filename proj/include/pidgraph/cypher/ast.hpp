// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pidgraph/property.hpp"

namespace pidgraph::cypher {

inline constexpr std::size_t kDefaultHopCeiling = 8;

enum class ExprKind {
  null_literal,
  literal,     // value
  list,        // children
  variable,    // name
  property,    // children[0].name
  label_test,  // children[0], labels
  compare,     // op in {=, <>, <, >, <=, >=}
  logical_and,
  logical_or,
  logical_xor,
  logical_not,
  is_null,      // negated
  string_match, // op in {CONTAINS, STARTS WITH, ENDS WITH}
  in_list,
  function,     // name, children, distinct
  count_star,
};

struct Expr {
  ExprKind kind = ExprKind::null_literal;
  std::string name;
  std::string op;
  PropertyValue value;
  std::vector<std::string> labels;
  std::vector<Expr> children;
  bool negated = false;
  bool distinct = false;
  std::size_t line = 0;
  std::size_t column = 0;

  bool is_aggregate() const;
};

struct NodePattern {
  std::optional<std::string> variable;
  std::vector<std::string> labels;
  std::vector<std::pair<std::string, Expr>> properties;
};

enum class RelDirection { out, in, any };

struct RelPattern {
  std::optional<std::string> variable;
  /// Alternatives; empty means any type.
  std::vector<std::string> types;
  RelDirection direction = RelDirection::any;
  bool variable_length = false;
  std::size_t min_hops = 1;
  /// Unset for open ranges such as `*` or `*2..`.
  std::optional<std::size_t> max_hops;
  std::vector<std::pair<std::string, Expr>> properties;
};

struct PathPattern {
  std::vector<NodePattern> nodes;  // size = rels.size() + 1
  std::vector<RelPattern> rels;
};

struct MatchClause {
  std::vector<PathPattern> patterns;
  std::optional<Expr> where;
};

struct ReturnItem {
  Expr expr;
  /// Alias, or the expression source text when no alias was given.
  std::string column;
  bool aliased = false;
};

struct Query {
  std::vector<MatchClause> matches;
  bool distinct = false;
  std::vector<ReturnItem> items;
  std::optional<std::int64_t> limit;
};

/// Canonical s-expression rendering, used for golden comparisons.
std::string to_sexpr(const Query& query);
std::string to_sexpr(const Expr& expr);

}  // namespace pidgraph::cypher
