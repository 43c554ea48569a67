// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pidgraph {

/// (name, template) for every shipped prompt file, sorted by name.
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_prompts();

/// Throws Error(configuration) for unknown names.
std::string_view prompt_template(std::string_view name);

std::string render_prompt(std::string_view name, const std::vector<std::pair<std::string, std::string>>& slots);

}  // namespace pidgraph
