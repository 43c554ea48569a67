// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

#include "pidgraph/cypher/ast.hpp"

namespace pidgraph::cypher {

/// Parses a read-only Cypher subset:
///   MATCH pattern (, pattern)* [WHERE expr] ... RETURN [DISTINCT] items [LIMIT n]
/// Throws QuerySyntaxError (with line, column and expected tokens) or
/// Error(query_semantic) for unbound or conflicting variables. Never
/// crashes on arbitrary input.
Query parse_query(std::string_view text);

}  // namespace pidgraph::cypher
