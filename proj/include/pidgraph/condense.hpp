// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pidgraph/graph.hpp"

namespace pidgraph {

/// Rules applied when moving one step up in abstraction.
struct LevelRules {
  std::vector<std::string> prune_labels;
  std::vector<std::string> collapse_labels;
  /// Glob patterns ('*', '?') over property names.
  std::vector<std::string> drop_properties;
};

/// Per-target-level rules. Condensing to conceptual applies the process
/// rules first, then the conceptual ones.
class CondensationRuleSet {
 public:
  CondensationRuleSet() = default;
  CondensationRuleSet(LevelRules process, LevelRules conceptual);

  /// Shipped defaults for DEXPI-derived graphs.
  static CondensationRuleSet defaults();
  /// JSON object {"process": {...}, "conceptual": {...}} with keys
  /// "prune", "collapse", "drop_properties".
  static CondensationRuleSet from_json(std::string_view text);
  static CondensationRuleSet load(const std::filesystem::path& path);

  const LevelRules& rules_for(AbstractionLevel target) const;

 private:
  void check() const;
  LevelRules process_;
  LevelRules conceptual_;
};

/// Condenses `graph` to `target`. Retained nodes keep their ids; collapsed
/// nodes fold into their nearest retained compositional ancestor, chains of
/// collapsed pass-through nodes become CONNECTED_TO edges, pruned nodes are
/// removed. Throws Error(invalid_transition) unless target is above the
/// graph's level.
Graph condense(const Graph& graph, AbstractionLevel target,
               const CondensationRuleSet& rules = CondensationRuleSet::defaults());

/// True iff every pair of `node_class` nodes (matched by id) is connected
/// in `a` exactly when it is connected in `b`, ignoring edge direction.
bool reachability_equivalent(const Graph& a, const Graph& b, std::string_view node_class);

}  // namespace pidgraph
