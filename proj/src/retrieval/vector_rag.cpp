// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/errors.hpp"
#include "pidgraph/retrieval.hpp"
#include "pidgraph/text.hpp"

namespace pidgraph {

using nlohmann::json;

json to_json(const ScoredNode& node) {
  return json{{"score", node.score}, {"elementId", node.node_id}, {"nodeLabels", node.node_labels},
              {"content", node.content}};
}

ToolResult vector_rag(const VectorIndex* index, const std::string& query, std::optional<std::size_t> top_k,
                      llm::Embedder& embedder) {
  if (!index) throw Error(ErrorKind::configuration, "vector index is not built");
  if (index->empty()) {
    throw Error(ErrorKind::configuration,
                std::string(to_string(index->name())) + " is empty; enrich the graph before vector search");
  }
  const std::size_t k = top_k.value_or(5);
  if (k == 0) throw Error(ErrorKind::invalid_argument, "topK must be positive");
  auto vectors = embedder.embed({query});
  if (vectors.size() != 1) throw Error(ErrorKind::provider, "embedder returned no vector for the query");
  auto hits = index->top_k(vectors.front(), k);

  ToolResult r;
  r.tool = ToolKind::vector_rag;
  r.content = "[\n";
  for (std::size_t i = 0; i < hits.size(); ++i) {
    r.content += "  " + to_json(hits[i]).dump() + (i + 1 < hits.size() ? ",\n" : "\n");
  }
  r.content += "]";
  r.token_estimate = estimate_tokens(r.content);
  r.structured = std::move(hits);
  return r;
}

}  // namespace pidgraph
