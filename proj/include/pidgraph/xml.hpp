// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pidgraph::xml {

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  /// Character data directly inside this element, concatenated.
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;

  const std::string* attribute(std::string_view key) const;
  /// Local name with any namespace prefix stripped.
  std::string_view local_name() const;
};

/// Parses a complete document and returns its root element. Throws
/// PositionedError (ErrorKind::parse) on malformed input.
Element parse(std::string_view document);

std::string escape_text(std::string_view text);
std::string escape_attribute(std::string_view text);

}  // namespace pidgraph::xml
