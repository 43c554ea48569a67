// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/errors.hpp"
#include "pidgraph/prompts.hpp"
#include "pidgraph/retrieval.hpp"
#include "pidgraph/text.hpp"

namespace pidgraph {

using nlohmann::json;

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::answer_found: return "answer_found";
    case Termination::max_depth: return "max_depth";
    case Termination::dead_end: return "dead_end";
    case Termination::no_next_hop: return "no_next_hop";
  }
  return "dead_end";
}

void PathRagParams::validate() const {
  if (max_depth < 1) throw Error(ErrorKind::invalid_argument, "maxDepth must be at least 1");
  if (max_breadth < 1) throw Error(ErrorKind::invalid_argument, "maxBreadth must be at least 1");
}

json to_json(const PathTrace& trace) {
  json j{{"node_ids", trace.node_ids},
         {"accumulated_context", trace.accumulated_context},
         {"terminated_by", std::string(to_string(trace.terminated_by))}};
  j["answer"] = trace.answer ? json(*trace.answer) : json(nullptr);
  return j;
}

std::string path_node_context(const Graph& graph, std::string_view node_id) {
  return node_context(graph, node_id);
}

std::optional<std::string> parse_evaluation(std::string_view reply) {
  auto open = reply.find('{');
  auto close = reply.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
  auto j = json::parse(reply.substr(open, close - open + 1), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  auto has = j.find("has_answer");
  if (has == j.end()) return std::nullopt;
  bool yes = has->is_boolean() ? has->get<bool>()
                               : (has->is_string() && to_lower(has->get<std::string>()) == "true");
  if (!yes) return std::nullopt;
  auto answer = j.find("answer");
  if (answer == j.end() || !answer->is_string()) return std::string{};
  return answer->get<std::string>();
}

namespace {

std::string step_context(const Graph& graph, const std::string& from, const std::string& to) {
  for (const auto& nb : graph.neighbors(from)) {
    if (nb.node->id != to) continue;
    const auto& a = graph.node(nb.edge->source).display_name();
    const auto& b = graph.node(nb.edge->target).display_name();
    return "via (" + a + ")-[:" + nb.edge->edge_type + "]->(" + b + ")\n";
  }
  return {};
}

class PathExplorer {
 public:
  PathExplorer(const std::string& query, const PathRagParams& params, const Graph& graph,
               const VectorIndex& local_index, const llm::LlmHandle& llm, llm::Embedder& embedder)
      : query_(query), params_(params), graph_(graph), local_(local_index), llm_(llm), embedder_(embedder) {}

  PathTrace explore(const std::string& start) {
    PathTrace trace;
    trace.node_ids.push_back(start);
    std::set<std::string> visited{start};
    extend_context(trace, start, {});
    if (evaluate(trace)) return trace;

    std::size_t hops = 0;
    std::string current = start;
    while (hops < params_.max_depth) {
      std::set<std::string> candidates;
      for (const auto& nb : graph_.neighbors(current, visited)) candidates.insert(nb.node->id);
      if (candidates.empty()) {
        trace.terminated_by = Termination::dead_end;
        return trace;
      }
      auto hop_query = std::string(trim(llm_.ask(
          render_prompt("next_hop_query", {{"query", query_}, {"context", trace.accumulated_context}}),
          "next_hop_query")));
      if (hop_query.empty()) {
        trace.terminated_by = Termination::no_next_hop;
        return trace;
      }
      auto vectors = embedder_.embed({hop_query});
      auto next = local_.top_k(vectors.at(0), 1, &candidates);
      if (next.empty()) {
        trace.terminated_by = Termination::no_next_hop;
        return trace;
      }
      const auto next_id = next.front().node_id;
      trace.node_ids.push_back(next_id);
      visited.insert(next_id);
      extend_context(trace, next_id, current);
      ++hops;
      if (evaluate(trace)) return trace;
      current = next_id;
    }
    trace.terminated_by = Termination::max_depth;
    return trace;
  }

 private:
  void extend_context(PathTrace& trace, const std::string& id, const std::string& previous) {
    trace.accumulated_context += "[" + std::to_string(trace.node_ids.size()) + "] ";
    if (!previous.empty()) trace.accumulated_context += step_context(graph_, previous, id);
    trace.accumulated_context += path_node_context(graph_, id) + "\n";
  }

  bool evaluate(PathTrace& trace) {
    auto reply = llm_.ask(
        render_prompt("evaluate_context", {{"query", query_}, {"context", trace.accumulated_context}}),
        "evaluate_context");
    trace.answer = parse_evaluation(reply);
    if (trace.answer) trace.terminated_by = Termination::answer_found;
    return trace.answer.has_value();
  }

  const std::string& query_;
  const PathRagParams& params_;
  const Graph& graph_;
  const VectorIndex& local_;
  const llm::LlmHandle& llm_;
  llm::Embedder& embedder_;
};

std::string render_paths(const Graph& graph, const std::vector<PathTrace>& traces) {
  std::string out;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i];
    std::vector<std::string> names;
    for (const auto& id : t.node_ids) names.push_back(graph.node(id).display_name());
    out += "Path " + std::to_string(i + 1) + ": " + join(names, " -> ") + " (" +
           std::string(to_string(t.terminated_by)) + ")\n";
    if (t.answer) out += "Candidate answer: " + *t.answer + "\n";
    out += "Context:\n" + t.accumulated_context;
    if (i + 1 < traces.size()) out += "\n";
  }
  return out;
}

}  // namespace

ToolResult path_rag(const std::string& query, const PathRagParams& params, const Graph& graph,
                    const VectorIndex* global_index, const VectorIndex* local_index, const llm::LlmHandle& llm,
                    llm::Embedder& embedder) {
  params.validate();
  if (!global_index || !local_index) throw Error(ErrorKind::configuration, "path_rag needs both vector indexes");

  PathRagOutcome outcome;
  if (!global_index->empty()) {
    auto vectors = embedder.embed({query});
    outcome.starts = global_index->top_k(vectors.at(0), params.max_breadth);
  }

  ToolResult r;
  r.tool = ToolKind::path_rag;
  if (outcome.starts.empty()) {
    outcome.no_answer = true;
    outcome.answer = std::string(kNoAnswerFound);
    r.content = outcome.answer;
    r.token_estimate = estimate_tokens(r.content);
    r.structured = std::move(outcome);
    return r;
  }

  PathExplorer explorer(query, params, graph, *local_index, llm, embedder);
  for (const auto& start : outcome.starts) outcome.traces.push_back(explorer.explore(start.node_id));

  const auto paths = render_paths(graph, outcome.traces);
  outcome.answer = std::string(
      trim(llm.ask(render_prompt("select_best_answer", {{"query", query}, {"paths", paths}}), "select_best_answer")));
  outcome.no_answer = outcome.answer.empty() || outcome.answer.find(kNoAnswerFound) != std::string::npos;
  if (outcome.no_answer) outcome.answer = std::string(kNoAnswerFound);

  r.content = "Answer: " + outcome.answer + "\n\n" + paths;
  r.token_estimate = estimate_tokens(r.content);
  r.structured = std::move(outcome);
  return r;
}

}  // namespace pidgraph
