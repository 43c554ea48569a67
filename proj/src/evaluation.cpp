// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/evaluation.hpp"

#include <fmt/format.h>

#include "pidgraph/errors.hpp"
#include "pidgraph/graphml.hpp"
#include "pidgraph/prompts.hpp"
#include "pidgraph/text.hpp"
#include "pidgraph/vector_index.hpp"

namespace pidgraph {

using nlohmann::json;

std::string_view to_string(QaCategory c) {
  switch (c) {
    case QaCategory::graph_query_single: return "graph_query_single";
    case QaCategory::graph_query_multi: return "graph_query_multi";
    case QaCategory::graph_summarization: return "graph_summarization";
    case QaCategory::knowledge_inference: return "knowledge_inference";
    case QaCategory::path_exploration: return "path_exploration";
  }
  return "graph_query_single";
}

QaCategory parse_category(std::string_view text) {
  for (auto c : kCategories) {
    if (to_string(c) == text) return c;
  }
  throw Error(ErrorKind::parse, "unknown QA category '" + std::string(text) + "'");
}

std::string_view category_title(QaCategory c) {
  switch (c) {
    case QaCategory::graph_query_single: return "Graph Query (single)";
    case QaCategory::graph_query_multi: return "Graph Query (multi)";
    case QaCategory::graph_summarization: return "Graph Summarization";
    case QaCategory::knowledge_inference: return "Knowledge Inference";
    case QaCategory::path_exploration: return "Path Exploration";
  }
  return "";
}

std::vector<QaItem> parse_qa_set(std::string_view jsonl) {
  std::vector<QaItem> items;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (const auto& line : split(jsonl, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      for (const auto& [key, value] : j.items()) {
        if (key != "id" && key != "category" && key != "question" && key != "reference_answer") {
          throw Error(ErrorKind::parse, "unknown field '" + key + "'");
        }
      }
      QaItem item{j.at("id").get<std::string>(), parse_category(j.at("category").get<std::string>()),
                  j.at("question").get<std::string>(), j.at("reference_answer").get<std::string>()};
      if (item.id.empty() || item.question.empty() || item.reference_answer.empty()) {
        throw Error(ErrorKind::parse, "empty field");
      }
      if (!ids.insert(item.id).second) throw Error(ErrorKind::parse, "duplicate id '" + item.id + "'");
      items.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw PositionedError(ErrorKind::parse, std::string("QA set: ") + e.what(), line_no, 1);
    } catch (const Error& e) {
      throw PositionedError(ErrorKind::parse, std::string("QA set: ") + e.what(), line_no, 1);
    }
  }
  return items;
}

std::vector<QaItem> load_qa_set(const std::filesystem::path& path) { return parse_qa_set(read_file(path)); }

double rescale(int score) {
  if (score < 1 || score > 5) throw Error(ErrorKind::scoring, "rubric score " + std::to_string(score) + " outside 1..5");
  return (score - 1) / 4.0;
}

double RubricScore::accuracy() const {
  double sum = 0;
  for (int s : scores) sum += rescale(s);
  return sum / 4.0;
}

json to_json(const RubricScore& r) {
  json j = json::object();
  for (std::size_t i = 0; i < 4; ++i) {
    j[std::string(RubricScore::kCriteria[i])] = {{"score", r.scores[i]}, {"justification", r.justifications[i]}};
  }
  return j;
}

RubricScore parse_rubric(std::string_view reply) {
  auto open = reply.find('{');
  auto close = reply.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw Error(ErrorKind::scoring, "judge reply contains no JSON object");
  }
  auto j = json::parse(reply.substr(open, close - open + 1), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::scoring, "judge reply is not a JSON object");
  RubricScore r;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::string key(RubricScore::kCriteria[i]);
    if (!j.contains(key) || !j.at(key).is_object()) throw Error(ErrorKind::scoring, "judge reply lacks '" + key + "'");
    const auto& c = j.at(key);
    if (!c.contains("score") || !c.at("score").is_number_integer()) {
      throw Error(ErrorKind::scoring, "'" + key + "' needs an integer score");
    }
    const auto s = c.at("score").get<int>();
    if (s < 1 || s > 5) throw Error(ErrorKind::scoring, "'" + key + "' score " + std::to_string(s) + " outside 1..5");
    if (!c.contains("justification") || !c.at("justification").is_string() ||
        trim(c.at("justification").get<std::string>()).empty()) {
      throw Error(ErrorKind::scoring, "'" + key + "' needs a justification");
    }
    r.scores[i] = s;
    r.justifications[i] = c.at("justification").get<std::string>();
  }
  return r;
}

std::string judge_prompt(const std::string& question, const std::string& answer, const std::string& reference) {
  return render_prompt("judge", {{"question", question}, {"reference", reference}, {"answer", answer}});
}

RubricScore judge_response(const std::string& question, const std::string& answer, const std::string& reference,
                           const llm::LlmHandle& judge) {
  llm::ChatRequest request;
  request.purpose = "judge";
  request.messages.push_back(llm::Message::user(judge_prompt(question, answer, reference)));
  auto first = judge.chat(request);
  try {
    return parse_rubric(first.content);
  } catch (const Error& e) {
    request.messages.push_back(llm::Message::assistant(first.content));
    request.messages.push_back(llm::Message::user(
        std::string("Your reply could not be used: ") + e.what() +
        ". Reply again with only the JSON object containing relatedness, completeness, correctness and coherence, "
        "each with an integer score from 1 to 5 and a justification."));
    auto second = judge.chat(request);
    try {
      return parse_rubric(second.content);
    } catch (const Error& e2) {
      throw Error(ErrorKind::scoring, std::string("judge output unusable after retry: ") + e2.what());
    }
  }
}

double score_semantic_similarity(const std::string& answer, const std::string& reference, llm::Embedder& embedder) {
  try {
    auto v = embedder.embed({answer, reference});
    if (v.size() != 2) throw Error(ErrorKind::provider, "embedder returned the wrong number of vectors");
    return cosine_similarity(v[0], v[1]);
  } catch (const Error& e) {
    throw Error(ErrorKind::scoring, std::string("semantic similarity: ") + e.what());
  }
}

std::string BenchConfig::label() const {
  return model + " / " + std::string(to_string(tool)) + " / " + std::string(to_string(level));
}

json to_json(const EvalRecord& r) {
  json tools = r.tools_called;
  json j{{"qa_id", r.qa_id},
         {"category", std::string(to_string(r.category))},
         {"model", r.config.model},
         {"tool", std::string(to_string(r.config.tool))},
         {"level", std::string(to_string(r.config.level))},
         {"repetition", r.repetition},
         {"scope", r.scope},
         {"answer", r.answer},
         {"accuracy", r.accuracy},
         {"similarity", r.similarity},
         {"input_tokens", r.usage.input_tokens},
         {"output_tokens", r.usage.output_tokens},
         {"cost", r.cost},
         {"latency_seconds", r.latency_seconds},
         {"tools_called", tools},
         {"limit_reached", r.limit_reached},
         {"failed", r.failed},
         {"error", r.error}};
  j["rubric"] = r.rubric ? to_json(*r.rubric) : json(nullptr);
  return j;
}

std::vector<EvalRecord> run_benchmark(const BenchmarkPlan& plan, const std::vector<QaItem>& qa,
                                      const BenchmarkEnvironment& env) {
  if (!env.gateway || !env.embedder) throw Error(ErrorKind::configuration, "benchmark needs a gateway and an embedder");
  if (plan.repetitions == 0) throw Error(ErrorKind::configuration, "repetitions must be positive");
  for (const auto& c : plan.configs) {
    auto it = env.graphs.find(c.level);
    if (it == env.graphs.end() || !it->second) {
      throw Error(ErrorKind::not_found, "no graph at level " + std::string(to_string(c.level)) + " for " + c.label());
    }
  }
  auto* judge_gateway = env.judge_gateway ? env.judge_gateway : env.gateway;

  std::vector<EvalRecord> records;
  for (std::size_t ci = 0; ci < plan.configs.size(); ++ci) {
    const auto& config = plan.configs[ci];
    AgentConfig agent_config;
    agent_config.model = config.model;
    agent_config.limits = plan.limits;
    agent_config.limits.benchmark_mode = true;
    agent_config.tools = {config.tool};
    agent_config.path_defaults = plan.path_defaults;
    Agent agent(*env.gateway, *env.embedder, agent_config);
    const auto& graph = env.graphs.at(config.level);

    for (const auto& item : qa) {
      for (std::size_t rep = 1; rep <= plan.repetitions; ++rep) {
        EvalRecord record;
        record.qa_id = item.id;
        record.category = item.category;
        record.config = config;
        record.repetition = rep;
        const auto session_id = "bench" + std::to_string(ci + 1) + "-" + item.id + "-r" + std::to_string(rep);
        try {
          AgentSession session(session_id, graph);
          auto turn = agent.run_turn(session, item.question);
          record.scope = turn.scope;
          record.answer = turn.answer;
          record.usage = turn.usage;
          record.cost = turn.cost;
          record.latency_seconds = turn.latency_seconds;
          record.limit_reached = turn.limit_reached;
          for (const auto& c : turn.tool_calls) record.tools_called.push_back(c.tool);
          if (turn.failed) throw Error(ErrorKind::provider, turn.error);
          for (const auto& c : turn.tool_calls) {
            if (c.ok) continue;
            for (const auto& e : turn.events) {
              if (e.type == AgentEvent::Type::tool_finished && e.call_id == c.call_id) {
                throw Error(ErrorKind::tool, c.tool + " " + e.summary);
              }
            }
            throw Error(ErrorKind::tool, c.tool + " failed");
          }
          llm::LlmHandle judge{judge_gateway, plan.judge_model, "judge/" + session_id, std::nullopt};
          record.rubric = judge_response(item.question, record.answer, item.reference_answer, judge);
          record.accuracy = record.rubric->accuracy();
          record.similarity = score_semantic_similarity(record.answer, item.reference_answer, *env.embedder);
        } catch (const std::exception& e) {
          record.failed = true;
          record.error = e.what();
        }
        if (env.on_record) env.on_record(record);
        records.push_back(std::move(record));
      }
    }
  }
  return records;
}

namespace {

struct Acc {
  std::size_t count = 0, failed = 0;
  double accuracy = 0, similarity = 0, cost = 0, latency = 0;
  void add(const EvalRecord& r) {
    if (r.failed) {
      ++failed;
      return;
    }
    ++count;
    accuracy += r.accuracy;
    similarity += r.similarity;
    cost += r.cost;
    latency += r.latency_seconds;
  }
  CellStats stats() const {
    CellStats s;
    s.count = count;
    s.failed = failed;
    if (count) {
      const auto n = static_cast<double>(count);
      s.accuracy = accuracy / n;
      s.similarity = similarity / n;
      s.cost = cost / n;
      s.latency_seconds = latency / n;
    }
    return s;
  }
};

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<EvalRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::map<QaCategory, Acc>, Acc>> acc;
  for (const auto& r : records) {
    const auto label = r.config.label();
    if (!acc.count(label)) order.push_back(label);
    auto& [cats, all] = acc[label];
    cats[r.category].add(r);
    all.add(r);
  }
  std::vector<AggregateRow> rows;
  for (const auto& label : order) {
    AggregateRow row;
    row.label = label;
    const auto& [cats, all] = acc.at(label);
    for (const auto& [cat, a] : cats) row.by_category[cat] = a.stats();
    row.overall = all.stats();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_report(const std::vector<AggregateRow>& rows) {
  std::string header = "| Configuration |";
  std::string rule = "|---|";
  for (auto c : kCategories) {
    header += " " + std::string(category_title(c)) + " |";
    rule += "---|";
  }
  header += " Average |\n";
  rule += "---|\n";

  auto table = [&](const std::string& title, auto value) {
    std::string out = "### " + title + "\n\n" + header + rule;
    for (const auto& row : rows) {
      out += "| " + row.label + " |";
      for (auto c : kCategories) {
        auto it = row.by_category.find(c);
        out += " " + (it == row.by_category.end() || it->second.count == 0 ? std::string("-") : value(it->second)) + " |";
      }
      out += " " + (row.overall.count == 0 ? std::string("-") : value(row.overall)) + " |\n";
    }
    return out;
  };
  std::string out;
  out += table("Response accuracy", [](const CellStats& s) { return fmt::format("{:.2f}", s.accuracy); });
  out += "\n";
  out += table("Cost per task ($)", [](const CellStats& s) { return fmt::format("{:.4f}", s.cost); });
  out += "\n";
  out += table("Execution time (s)", [](const CellStats& s) { return fmt::format("{:.2f}s", s.latency_seconds); });
  out += "\n";
  out += table("Semantic similarity", [](const CellStats& s) { return fmt::format("{:.2f}", s.similarity); });
  out += "\n";
  for (const auto& row : rows) out += "- " + render_summary_line(row) + "\n";
  return out;
}

std::string render_summary_line(const AggregateRow& row) {
  return fmt::format("{}: {:.2f} / ${:.3f} / {:.2f}s ({} records, {} failed)", row.label, row.overall.accuracy,
                     row.overall.cost, row.overall.latency_seconds, row.overall.count, row.overall.failed);
}

std::vector<llm::MockRule> mock_bench_rules(const std::vector<QaItem>& qa, std::array<int, 4> judge_scores) {
  std::vector<llm::MockRule> rules;
  for (auto tool : {ToolKind::context_rag, ToolKind::vector_rag, ToolKind::path_rag, ToolKind::cypher_rag}) {
    const std::string name(to_string(tool));
    llm::MockRule r;
    r.when.purpose = "agent";
    r.when.offers = name;
    r.when.before_tool = name;
    json args = tool == ToolKind::context_rag ? json{{"mode", "graph"}} : json{{"query", "{{last_user}}"}};
    r.reply.tool_calls.push_back(llm::ToolCall{"", name, args});
    rules.push_back(std::move(r));
  }
  for (const auto& item : qa) {
    llm::MockRule r;
    r.when.purpose = "agent";
    r.when.contains = item.question;
    r.reply.content = item.reference_answer;
    rules.push_back(std::move(r));
  }
  auto fixed = [&](const std::string& purpose, std::string content) {
    llm::MockRule r;
    r.when.purpose = purpose;
    r.reply.content = std::move(content);
    rules.push_back(std::move(r));
  };
  fixed("evaluate_context", R"({"has_answer": true, "answer": "The path context answers the question."})");
  fixed("next_hop_query", "connected component downstream");
  fixed("select_best_answer", "Path 1 contains the relevant information.");
  fixed("generate_cypher", "MATCH (n:Equipment) RETURN n.tagName");
  fixed("cypher_answer", "The query results list the equipment tags.");
  json judge = json::object();
  for (std::size_t i = 0; i < 4; ++i) {
    judge[std::string(RubricScore::kCriteria[i])] = {
        {"score", judge_scores[i]}, {"justification", "Scored against the reference answer."}};
  }
  fixed("judge", judge.dump());
  return rules;
}

}  // namespace pidgraph
