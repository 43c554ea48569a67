// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/errors.hpp"
#include "pidgraph/retrieval.hpp"

namespace pidgraph {

using nlohmann::json;

std::string_view to_string(ToolKind tool) {
  switch (tool) {
    case ToolKind::context_rag: return "context_rag";
    case ToolKind::vector_rag: return "vector_rag";
    case ToolKind::path_rag: return "path_rag";
    case ToolKind::cypher_rag: return "cypher_rag";
  }
  return "context_rag";
}

ToolKind parse_tool(std::string_view name) {
  for (auto t : {ToolKind::context_rag, ToolKind::vector_rag, ToolKind::path_rag, ToolKind::cypher_rag}) {
    if (to_string(t) == name) return t;
  }
  throw Error(ErrorKind::tool, "unknown tool '" + std::string(name) + "'");
}

std::string_view to_string(ContextMode mode) { return mode == ContextMode::graph ? "graph" : "topology"; }

ContextMode parse_context_mode(std::string_view text) {
  if (text == "graph") return ContextMode::graph;
  if (text == "topology") return ContextMode::topology;
  throw Error(ErrorKind::invalid_argument, "unknown context mode '" + std::string(text) + "'");
}

json to_json(const ToolResult& result) {
  json j{{"tool", std::string(to_string(result.tool))},
         {"content", result.content},
         {"token_estimate", result.token_estimate}};
  std::visit(
      [&](const auto& payload) {
        using T = std::decay_t<decltype(payload)>;
        if constexpr (std::is_same_v<T, std::vector<ScoredNode>>) {
          json nodes = json::array();
          for (const auto& n : payload) nodes.push_back(to_json(n));
          j["structured"] = nodes;
        } else if constexpr (std::is_same_v<T, PathRagOutcome>) {
          json traces = json::array();
          for (const auto& t : payload.traces) traces.push_back(to_json(t));
          json starts = json::array();
          for (const auto& s : payload.starts) starts.push_back(to_json(s));
          j["structured"] = {{"answer", payload.answer}, {"no_answer", payload.no_answer}, {"starts", starts},
                             {"traces", traces}};
        } else if constexpr (std::is_same_v<T, CypherRagOutcome>) {
          j["structured"] = {{"cypher", payload.query},
                             {"answer", payload.answer},
                             {"empty_grounding", payload.empty_grounding},
                             {"table", cypher::to_json(payload.table)}};
        }
      },
      result.structured);
  return j;
}

std::vector<llm::ToolDescriptor> tool_descriptors() {
  std::vector<llm::ToolDescriptor> out;
  out.push_back({"context_rag",
                 "Return the whole P&ID knowledge graph as filtered GraphML. Mode \"graph\" keeps labels, tag "
                 "numbers, design specifications and relationship labels; \"topology\" keeps only labels and "
                 "connectivity.",
                 json::parse(R"({"type": "object",
                   "properties": {"mode": {"type": "string", "enum": ["graph", "topology"],
                                           "description": "Level of detail, default graph"}},
                   "additionalProperties": false})")});
  out.push_back({"vector_rag",
                 "Semantic search for the graph nodes most similar to a query. Returns scored nodes with labels "
                 "and their properties and semantic descriptions.",
                 json::parse(R"({"type": "object",
                   "properties": {"query": {"type": "string", "description": "What to look for"},
                                  "index": {"type": "string", "enum": ["global", "local"],
                                            "description": "Global (role in the flowsheet, default) or local (neighborhood) semantics"},
                                  "top_k": {"type": "integer", "minimum": 1, "maximum": 50,
                                            "description": "Number of nodes, default 5"}},
                   "required": ["query"], "additionalProperties": false})")});
  out.push_back({"path_rag",
                 "Locate the components most relevant to a question and trace connected paths from them, hop by "
                 "hop, until the question can be answered.",
                 json::parse(R"({"type": "object",
                   "properties": {"query": {"type": "string", "description": "The question to answer"},
                                  "max_depth": {"type": "integer", "minimum": 1, "maximum": 10,
                                                "description": "Maximum hops per path, default 3"},
                                  "max_breadth": {"type": "integer", "minimum": 1, "maximum": 5,
                                                  "description": "Number of starting nodes, default 2"}},
                   "required": ["query"], "additionalProperties": false})")});
  out.push_back({"cypher_rag",
                 "Answer a factual question by generating and running one graph query against the knowledge "
                 "graph schema. Returns the answer and the executed query.",
                 json::parse(R"({"type": "object",
                   "properties": {"query": {"type": "string", "description": "The question to answer"}},
                   "required": ["query"], "additionalProperties": false})")});
  return out;
}

namespace {

void check_arguments(const llm::ToolDescriptor& tool, const json& args) {
  auto bad = [&](const std::string& what) { return Error(ErrorKind::tool, tool.name + ": " + what); };
  if (!args.is_object()) throw bad("arguments must be an object");
  const auto& props = tool.parameters.at("properties");
  for (const auto& [key, value] : args.items()) {
    if (!props.contains(key)) throw bad("unknown argument '" + key + "'");
    const auto& schema = props.at(key);
    const auto type = schema.at("type").get<std::string>();
    if (type == "string") {
      if (!value.is_string()) throw bad("argument '" + key + "' must be a string");
      if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& option : schema.at("enum")) ok = ok || option == value;
        if (!ok) throw bad("argument '" + key + "' must be one of " + schema.at("enum").dump());
      }
    } else if (type == "integer") {
      if (!value.is_number_integer()) throw bad("argument '" + key + "' must be an integer");
      auto v = value.get<std::int64_t>();
      if (schema.contains("minimum") && v < schema.at("minimum").get<std::int64_t>()) {
        throw bad("argument '" + key + "' is below " + schema.at("minimum").dump());
      }
      if (schema.contains("maximum") && v > schema.at("maximum").get<std::int64_t>()) {
        throw bad("argument '" + key + "' is above " + schema.at("maximum").dump());
      }
    }
  }
  if (tool.parameters.contains("required")) {
    for (const auto& key : tool.parameters.at("required")) {
      if (!args.contains(key.get<std::string>())) throw bad("missing argument '" + key.get<std::string>() + "'");
    }
  }
}

}  // namespace

ToolResult run_tool(const std::string& name, const json& arguments, RetrievalContext& context) {
  const auto kind = parse_tool(name);
  const auto descriptors = tool_descriptors();
  check_arguments(descriptors[static_cast<std::size_t>(kind)], arguments);
  if (!context.graph) throw Error(ErrorKind::configuration, "no graph bound to the retrieval context");
  const auto& graph = *context.graph;
  auto need_embedder = [&]() -> llm::Embedder& {
    if (!context.embedder) throw Error(ErrorKind::configuration, "no embedder configured");
    return *context.embedder;
  };
  switch (kind) {
    case ToolKind::context_rag:
      return context_rag(graph, parse_context_mode(arguments.value("mode", "graph")));
    case ToolKind::vector_rag: {
      const auto* index = arguments.value("index", "global") == "local" ? context.local_index : context.global_index;
      std::optional<std::size_t> k = context.default_top_k;
      if (arguments.contains("top_k")) k = arguments.at("top_k").get<std::size_t>();
      return vector_rag(index, arguments.at("query").get<std::string>(), k, need_embedder());
    }
    case ToolKind::path_rag: {
      auto params = context.path_defaults;
      if (arguments.contains("max_depth")) params.max_depth = arguments.at("max_depth").get<std::size_t>();
      if (arguments.contains("max_breadth")) params.max_breadth = arguments.at("max_breadth").get<std::size_t>();
      return path_rag(arguments.at("query").get<std::string>(), params, graph, context.global_index,
                      context.local_index, context.llm, need_embedder());
    }
    case ToolKind::cypher_rag:
      return cypher_rag(arguments.at("query").get<std::string>(), graph, context.llm, context.query_options);
  }
  throw Error(ErrorKind::tool, "unknown tool '" + name + "'");
}

}  // namespace pidgraph
