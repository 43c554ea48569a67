// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/errors.hpp"
#include "pidgraph/prompts.hpp"
#include "pidgraph/retrieval.hpp"
#include "pidgraph/text.hpp"

namespace pidgraph {

std::string extract_query_text(std::string_view reply) {
  auto text = trim(reply);
  auto open = text.find("```");
  if (open != std::string_view::npos) {
    auto line_end = text.find('\n', open);
    auto close = line_end == std::string_view::npos ? std::string_view::npos : text.find("```", line_end);
    if (close != std::string_view::npos) return std::string(trim(text.substr(line_end + 1, close - line_end - 1)));
  }
  return std::string(text);
}

ToolResult cypher_rag(const std::string& query, const Graph& graph, const llm::LlmHandle& llm,
                      const cypher::ExecuteOptions& options) {
  const auto schema_text = cypher::render_schema_context(schema(graph));
  const auto generated =
      extract_query_text(llm.ask(render_prompt("generate_cypher", {{"schema", schema_text}, {"query", query}}),
                                 "generate_cypher"));

  CypherRagOutcome outcome;
  outcome.query = generated;
  try {
    outcome.table = cypher::run_query(generated, graph, options);
  } catch (const PositionedError& e) {
    std::string message = e.what();
    if (auto at = message.rfind(" at line "); at != std::string::npos) message.resize(at);
    throw PositionedError(ErrorKind::tool, "cypher_rag: generated query rejected (" + message + ")", e.line(),
                          e.column());
  } catch (const Error& e) {
    throw Error(ErrorKind::tool, std::string("cypher_rag: generated query failed (") + e.what() + ")");
  }
  outcome.empty_grounding = outcome.table.rows.empty();
  const auto results = cypher::render_table(outcome.table);
  outcome.answer = std::string(trim(llm.ask(
      render_prompt("cypher_answer", {{"query", query}, {"cypher", generated}, {"results", results}}),
      "cypher_answer")));

  ToolResult r;
  r.tool = ToolKind::cypher_rag;
  r.content = "Cypher: " + outcome.query + "\nRows: " + std::to_string(outcome.table.rows.size()) +
              (outcome.empty_grounding ? " (no matching data)" : "") + "\nAnswer: " + outcome.answer;
  r.token_estimate = estimate_tokens(r.content);
  r.structured = std::move(outcome);
  return r;
}

}  // namespace pidgraph
