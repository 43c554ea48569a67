// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/prompts.hpp"

#include "pidgraph/errors.hpp"
#include "pidgraph/text.hpp"

namespace pidgraph {

std::string_view prompt_template(std::string_view name) {
  for (const auto& [n, body] : embedded_prompts()) {
    if (n == name) return body;
  }
  throw Error(ErrorKind::configuration, "unknown prompt template '" + std::string(name) + "'");
}

std::string render_prompt(std::string_view name, const std::vector<std::pair<std::string, std::string>>& slots) {
  return fill_template(prompt_template(name), slots);
}

}  // namespace pidgraph
