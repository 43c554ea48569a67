// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pidgraph/cypher/executor.hpp"
#include "pidgraph/graph.hpp"
#include "pidgraph/llm/gateway.hpp"
#include "pidgraph/vector_index.hpp"

namespace pidgraph {

enum class ToolKind { context_rag, vector_rag, path_rag, cypher_rag };
std::string_view to_string(ToolKind tool);
ToolKind parse_tool(std::string_view name);

enum class ContextMode { graph, topology };
std::string_view to_string(ContextMode mode);
ContextMode parse_context_mode(std::string_view text);

enum class Termination { answer_found, max_depth, dead_end, no_next_hop };
std::string_view to_string(Termination t);

struct PathTrace {
  std::vector<std::string> node_ids;
  std::string accumulated_context;
  std::optional<std::string> answer;
  Termination terminated_by = Termination::dead_end;
};

struct PathRagParams {
  /// Maximum hops from the starting node.
  std::size_t max_depth = 3;
  /// Number of starting nodes.
  std::size_t max_breadth = 2;
  void validate() const;
};

inline constexpr std::string_view kNoAnswerFound = "NoAnswerFound";

struct PathRagOutcome {
  std::vector<ScoredNode> starts;
  std::vector<PathTrace> traces;
  std::string answer;
  bool no_answer = false;
};

struct CypherRagOutcome {
  std::string query;
  std::string answer;
  cypher::ResultTable table;
  bool empty_grounding = false;
};

using ToolPayload = std::variant<std::monostate, std::vector<ScoredNode>, PathRagOutcome, CypherRagOutcome>;

struct ToolResult {
  ToolKind tool = ToolKind::context_rag;
  std::string content;
  ToolPayload structured;
  std::size_t token_estimate = 0;
};

nlohmann::json to_json(const ScoredNode& node);
nlohmann::json to_json(const PathTrace& trace);
nlohmann::json to_json(const ToolResult& result);

/// Everything a tool invocation reads. Indexes are built from the snapshot.
struct RetrievalContext {
  GraphSnapshot graph;
  const VectorIndex* global_index = nullptr;
  const VectorIndex* local_index = nullptr;
  llm::Embedder* embedder = nullptr;
  llm::LlmHandle llm;
  PathRagParams path_defaults;
  std::size_t default_top_k = 5;
  cypher::ExecuteOptions query_options;
};

/// Filtered GraphML: no internal ids, URIs, drawing data or embeddings.
/// Graph mode keeps labels, properties and relationship labels; topology
/// mode keeps labels and connectivity.
std::string render_context(const Graph& graph, ContextMode mode);
/// Property names removed from every rendering.
bool is_noise_property(std::string_view name);

ToolResult context_rag(const Graph& graph, ContextMode mode);

/// Throws Error(configuration) when the index is missing or empty.
ToolResult vector_rag(const VectorIndex* index, const std::string& query, std::optional<std::size_t> top_k,
                      llm::Embedder& embedder);

ToolResult path_rag(const std::string& query, const PathRagParams& params, const Graph& graph,
                    const VectorIndex* global_index, const VectorIndex* local_index, const llm::LlmHandle& llm,
                    llm::Embedder& embedder);

/// Single generation attempt. Invalid generated queries raise
/// PositionedError(tool) carrying the parser position.
ToolResult cypher_rag(const std::string& query, const Graph& graph, const llm::LlmHandle& llm,
                      const cypher::ExecuteOptions& options = {});

/// Context block for one node as accumulated along a path.
std::string path_node_context(const Graph& graph, std::string_view node_id);

/// Strips Markdown code fences around a generated query.
std::string extract_query_text(std::string_view reply);

/// {"has_answer": bool, "answer": text} parsed leniently; anything else
/// counts as no answer.
std::optional<std::string> parse_evaluation(std::string_view reply);

std::vector<llm::ToolDescriptor> tool_descriptors();

/// Validates arguments against the descriptor and runs the tool. Bad
/// arguments and unknown tools raise Error(tool).
ToolResult run_tool(const std::string& name, const nlohmann::json& arguments, RetrievalContext& context);

}  // namespace pidgraph
