// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace corpus {

struct Golden {
  std::string text;
  std::string sexpr;
};

struct SyntaxCase {
  std::string text;
  std::size_t line;
  std::size_t column;
  /// One token that must appear in the expected set; empty to skip.
  std::string expected;
};

/// Query text paired with a hand-written AST rendering.
const std::vector<Golden>& goldens();
/// Inputs that must fail with a positioned syntax error.
const std::vector<SyntaxCase>& syntax_errors();
/// Inputs that parse but must fail semantic checks.
const std::vector<std::string>& semantic_errors();
/// Queries executed against both the executor and the oracle.
const std::vector<std::string>& oracle_queries();

}  // namespace corpus
