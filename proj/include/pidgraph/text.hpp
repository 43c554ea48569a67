// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace pidgraph {

/// JSON string literal with escapes; non-ASCII bytes pass through.
std::string json_quote(std::string_view text);

std::string_view trim(std::string_view text);
std::string to_lower(std::string_view text);
bool starts_with(std::string_view text, std::string_view prefix);
bool contains_ci(std::string_view haystack, std::string_view needle);
std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Shell-style wildcard match supporting '*' and '?', case-sensitive.
bool glob_match(std::string_view pattern, std::string_view text);

/// Replaces every "{name}" slot; unknown slots are left untouched.
std::string fill_template(std::string_view tmpl,
                          const std::vector<std::pair<std::string, std::string>>& slots);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ULL);

/// Token estimator used for pre-flight budgeting. Default is ceil(chars / 4).
using TokenEstimator = std::function<std::size_t(std::string_view)>;
std::size_t estimate_tokens(std::string_view text);

}  // namespace pidgraph
