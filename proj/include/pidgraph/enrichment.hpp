// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "pidgraph/errors.hpp"
#include "pidgraph/graph.hpp"
#include "pidgraph/llm/gateway.hpp"

namespace pidgraph {

struct SemanticPair {
  std::string global_description;
  std::string local_description;
};

/// Global template filled for one node. `graph_rendering` is the
/// ContextRAG graph-mode document of the whole flowsheet.
std::string global_semantic_prompt(const Graph& graph, std::string_view node_id, const std::string& graph_rendering);
std::string local_semantic_prompt(const Graph& graph, std::string_view node_id);

/// One LLM call each. Failures surface as Error(enrichment) naming the node.
std::string generate_global_semantic(const Graph& graph, std::string_view node_id, const std::string& graph_rendering,
                                     const llm::LlmHandle& llm);
std::string generate_local_semantic(const Graph& graph, std::string_view node_id, const llm::LlmHandle& llm);

struct EnrichmentOptions {
  /// Leave nodes that already carry both semantics and both embeddings.
  bool skip_existing = false;
  /// Concurrent node workers. With 1 the provider sees calls in id order.
  std::size_t parallelism = 1;
};

struct EnrichmentFailure {
  std::string node_id;
  ErrorKind kind = ErrorKind::enrichment;
  std::string message;
};

struct EnrichmentReport {
  std::size_t enriched = 0;
  std::size_t skipped = 0;
  std::vector<EnrichmentFailure> failures;

  bool ok() const { return failures.empty(); }
  /// Throws Error(enrichment) listing the failed node ids.
  void throw_if_failed() const;
};

/// Generates global and local semantics for every node in id order, embeds
/// each into its own slot and commits per node. Failed nodes stay
/// unmodified. Throws Error(dimension) when the embedder dimension differs
/// from the graph's.
EnrichmentReport enrich_graph(Graph& graph, const llm::LlmHandle& llm, llm::Embedder& embedder,
                              const EnrichmentOptions& options = {});

}  // namespace pidgraph
