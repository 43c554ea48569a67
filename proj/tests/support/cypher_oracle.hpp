// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "pidgraph/cypher/ast.hpp"
#include "pidgraph/cypher/executor.hpp"
#include "pidgraph/graph.hpp"

namespace oracle {

/// Rows rendered as strings: nodes "node:<id>", relationships
/// "rel:<id>", lists "path:[ids]", values as literals, null as "null".
using Rows = std::vector<std::vector<std::string>>;

/// Brute-force evaluation: every assignment of graph nodes to pattern
/// node positions, every simple edge walk between them, then filtering.
/// count(*), count(x) and count(DISTINCT x) group on the remaining items.
Rows evaluate(const pidgraph::cypher::Query& query, const pidgraph::Graph& graph, std::size_t hop_ceiling = 8);

/// Executor output in the same rendering.
Rows flatten(const pidgraph::cypher::ResultTable& table);

}  // namespace oracle
