// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/enrichment.hpp"

#include <atomic>
#include <thread>

#include "pidgraph/prompts.hpp"
#include "pidgraph/retrieval.hpp"
#include "pidgraph/text.hpp"

namespace pidgraph {

namespace {

std::string labels_json(const Node& n) {
  std::string out = "[";
  for (std::size_t i = 0; i < n.labels.size(); ++i) out += (i ? ", " : "") + json_quote(n.labels[i]);
  return out + "]";
}

std::string connection_json(const Neighbor& nb) {
  return "{\"relationship\": " + json_quote(nb.edge->edge_type) + ", \"labels\": " + labels_json(*nb.node) +
         ", \"properties\": " + nb.node->properties.to_json() + "}";
}

std::string connections_json(const std::vector<Neighbor>& neighbors, Direction direction) {
  std::string out;
  for (const auto& nb : neighbors) {
    if (nb.direction != direction) continue;
    out += out.empty() ? "[\n  " : ",\n  ";
    out += connection_json(nb);
  }
  return out.empty() ? "[]" : out + "\n]";
}

Error enrichment_error(std::string_view node_id, const std::string& what, const std::exception& e) {
  return Error(ErrorKind::enrichment, "node '" + std::string(node_id) + "': " + what + " failed: " + e.what());
}

struct NodeResult {
  bool done = false;
  SemanticPair pair;
  Embedding global;
  Embedding local;
  std::optional<EnrichmentFailure> failure;
};

}  // namespace

std::string global_semantic_prompt(const Graph& graph, std::string_view node_id, const std::string& graph_rendering) {
  const auto& n = graph.node(node_id);
  return render_prompt("global_semantic", {{"labels", labels_json(n)},
                                           {"properties_json", n.properties.to_json()},
                                           {"full_graph_representation", graph_rendering}});
}

std::string local_semantic_prompt(const Graph& graph, std::string_view node_id) {
  const auto& n = graph.node(node_id);
  const auto neighbors = graph.neighbors(node_id);
  return render_prompt("local_semantic",
                       {{"node_labels", labels_json(n)},
                        {"node_properties_json", n.properties.to_json()},
                        {"incoming_connections_json", connections_json(neighbors, Direction::incoming)},
                        {"outgoing_connections_json", connections_json(neighbors, Direction::outgoing)}});
}

std::string generate_global_semantic(const Graph& graph, std::string_view node_id, const std::string& graph_rendering,
                                     const llm::LlmHandle& llm) {
  const auto prompt = global_semantic_prompt(graph, node_id, graph_rendering);
  try {
    return std::string(trim(llm.ask(prompt, "global_semantic")));
  } catch (const std::exception& e) {
    throw enrichment_error(node_id, "global semantic generation", e);
  }
}

std::string generate_local_semantic(const Graph& graph, std::string_view node_id, const llm::LlmHandle& llm) {
  const auto prompt = local_semantic_prompt(graph, node_id);
  try {
    return std::string(trim(llm.ask(prompt, "local_semantic")));
  } catch (const std::exception& e) {
    throw enrichment_error(node_id, "local semantic generation", e);
  }
}

void EnrichmentReport::throw_if_failed() const {
  if (failures.empty()) return;
  std::vector<std::string> ids;
  for (const auto& f : failures) ids.push_back(f.node_id);
  throw Error(ErrorKind::enrichment, std::to_string(failures.size()) + " node(s) failed enrichment: " + join(ids, ", ") +
                                         " (first: " + failures.front().message + ")");
}

EnrichmentReport enrich_graph(Graph& graph, const llm::LlmHandle& llm, llm::Embedder& embedder,
                              const EnrichmentOptions& options) {
  if (embedder.dimension() != graph.embedding_dim()) {
    throw Error(ErrorKind::dimension, "embedder dimension " + std::to_string(embedder.dimension()) +
                                          " differs from graph embedding dimension " +
                                          std::to_string(graph.embedding_dim()));
  }
  EnrichmentReport report;
  std::vector<std::string> todo;
  for (const auto& id : graph.sorted_node_ids()) {
    const auto& n = graph.node(id);
    const bool complete = n.global_semantic && n.local_semantic && n.global_embedding && n.local_embedding;
    if (options.skip_existing && complete) {
      ++report.skipped;
    } else {
      todo.push_back(id);
    }
  }
  if (todo.empty()) return report;

  const auto rendering = render_context(graph, ContextMode::graph);
  const Graph& view = graph;
  std::vector<NodeResult> results(todo.size());

  auto work = [&](std::size_t i) {
    const auto& id = todo[i];
    auto& r = results[i];
    try {
      r.pair.global_description = generate_global_semantic(view, id, rendering, llm);
      r.pair.local_description = generate_local_semantic(view, id, llm);
      if (r.pair.global_description.empty() || r.pair.local_description.empty()) {
        throw Error(ErrorKind::enrichment, "node '" + id + "': empty semantic description");
      }
      std::vector<Embedding> vectors;
      try {
        vectors = embedder.embed({r.pair.global_description, r.pair.local_description});
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::dimension) throw;
        throw enrichment_error(id, "embedding", e);
      }
      if (vectors.size() != 2) {
        throw Error(ErrorKind::enrichment, "node '" + id + "': embedder returned " + std::to_string(vectors.size()) +
                                               " vectors for 2 texts");
      }
      for (const auto& v : vectors) {
        if (v.size() != view.embedding_dim()) {
          throw Error(ErrorKind::dimension, "node '" + id + "': embedding has dimension " + std::to_string(v.size()) +
                                                ", graph expects " + std::to_string(view.embedding_dim()));
        }
      }
      r.global = std::move(vectors[0]);
      r.local = std::move(vectors[1]);
      r.done = true;
    } catch (const Error& e) {
      r.failure = EnrichmentFailure{id, e.kind(), e.what()};
    } catch (const std::exception& e) {
      r.failure = EnrichmentFailure{id, ErrorKind::enrichment, e.what()};
    }
  };

  const auto workers = std::max<std::size_t>(1, std::min(options.parallelism, todo.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < todo.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (auto i = next++; i < todo.size(); i = next++) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < todo.size(); ++i) {
    auto& r = results[i];
    if (!r.done) {
      report.failures.push_back(*r.failure);
      continue;
    }
    try {
      graph.set_embeddings(todo[i], std::move(r.global), std::move(r.local));
      graph.set_semantics(todo[i], std::move(r.pair.global_description), std::move(r.pair.local_description));
      ++report.enriched;
    } catch (const Error& e) {
      report.failures.push_back(EnrichmentFailure{todo[i], e.kind(), e.what()});
    }
  }
  return report;
}

}  // namespace pidgraph
