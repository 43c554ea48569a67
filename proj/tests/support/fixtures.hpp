// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "pidgraph/graph.hpp"

namespace fixtures {

/// Complete-level flowsheet modeled on the DEXPI example plant: tank
/// T4750, pumps P4711/P4712, cooler H1007 with a temperature loop, piping
/// hierarchy, nozzles, labels and drawing noise.
pidgraph::Graph flowsheet();

/// Id of the first node whose tagName equals `tag`.
std::string id_of(const pidgraph::Graph& g, const std::string& tag);

/// HE -> TIC -> Actuator -> GlobeValve -> OPC(CWR) plus a direct HE ->
/// GlobeValve line and a pump feeding the exchanger. Embeddings are unset.
pidgraph::Graph path_fixture();

/// Five-node graph carrying every property type, semantics and embeddings.
pidgraph::Graph small_graph(std::size_t dim = pidgraph::kDefaultEmbeddingDim);

/// Path of `n` nodes a0 -CONNECTED_TO-> a1 ... labeled Pump/Tank alternately.
pidgraph::Graph chain(std::size_t n);

std::filesystem::path data_dir();

}  // namespace fixtures
