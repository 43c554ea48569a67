// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "pidgraph/graph.hpp"

namespace fixtures {

/// Random graph of up to `max_nodes` nodes covering every property type,
/// awkward text (markup characters, quotes, non-ASCII), self loops,
/// parallel edges, optional semantics and embeddings of dimension `dim`.
pidgraph::Graph random_graph(std::mt19937_64& rng, std::size_t max_nodes = 100, std::size_t dim = 16);

}  // namespace fixtures
