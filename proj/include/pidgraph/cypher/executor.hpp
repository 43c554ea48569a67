// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pidgraph/cypher/ast.hpp"
#include "pidgraph/graph.hpp"

namespace pidgraph::cypher {

struct NodeValue {
  std::string id;
  std::vector<std::string> labels;
  PropertyMap properties;
  friend bool operator==(const NodeValue&, const NodeValue&) = default;
};

struct EdgeValue {
  std::string id;
  std::string edge_type;
  std::string source;
  std::string target;
  PropertyMap properties;
  friend bool operator==(const EdgeValue&, const EdgeValue&) = default;
};

using EdgeList = std::vector<EdgeValue>;

/// Null, a property value, a node, a relationship, or a variable-length
/// relationship list.
using Cell = std::variant<std::monostate, PropertyValue, NodeValue, EdgeValue, EdgeList>;

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  /// Schema warnings such as unknown labels or relationship types.
  std::vector<std::string> warnings;

  bool empty() const { return rows.empty(); }
};

struct ExecuteOptions {
  /// Upper bound on variable-length hops; open ranges resolve to it.
  std::size_t hop_ceiling = kDefaultHopCeiling;
};

/// Read-only over `graph`; safe to call concurrently on the same snapshot.
ResultTable execute_query(const Query& query, const Graph& graph, const ExecuteOptions& options = {});

/// parse_query followed by execute_query.
ResultTable run_query(std::string_view text, const Graph& graph, const ExecuteOptions& options = {});

/// Compact literal rendering of one cell.
std::string render_cell(const Cell& cell);
/// Aligned text table with a row count footer.
std::string render_table(const ResultTable& table);
/// {"columns": [...], "rows": [[...]...], "warnings": [...]}
nlohmann::json to_json(const ResultTable& table);
nlohmann::json to_json(const Cell& cell);

/// Schema listing for query-generation prompts. Deterministic.
std::string render_schema_context(const GraphSchema& schema);

}  // namespace pidgraph::cypher
