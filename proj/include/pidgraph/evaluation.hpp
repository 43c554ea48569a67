// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pidgraph/agent.hpp"
#include "pidgraph/llm/gateway.hpp"
#include "pidgraph/llm/mock.hpp"

namespace pidgraph {

enum class QaCategory {
  graph_query_single,
  graph_query_multi,
  graph_summarization,
  knowledge_inference,
  path_exploration,
};

/// Report column order.
inline constexpr std::array<QaCategory, 5> kCategories = {
    QaCategory::graph_query_single, QaCategory::graph_query_multi, QaCategory::graph_summarization,
    QaCategory::knowledge_inference, QaCategory::path_exploration};

std::string_view to_string(QaCategory c);
QaCategory parse_category(std::string_view text);
/// "Graph Query (single)" and so on.
std::string_view category_title(QaCategory c);

struct QaItem {
  std::string id;
  QaCategory category = QaCategory::graph_query_single;
  std::string question;
  std::string reference_answer;
};

/// One {"id","category","question","reference_answer"} object per line.
std::vector<QaItem> parse_qa_set(std::string_view jsonl);
std::vector<QaItem> load_qa_set(const std::filesystem::path& path);

/// r -> (r - 1) / 4 for r in 1..5; throws Error(scoring) otherwise.
double rescale(int score);

struct RubricScore {
  static constexpr std::array<std::string_view, 4> kCriteria = {"relatedness", "completeness", "correctness",
                                                                 "coherence"};
  std::array<int, 4> scores{1, 1, 1, 1};
  std::array<std::string, 4> justifications;

  int relatedness() const { return scores[0]; }
  int completeness() const { return scores[1]; }
  int correctness() const { return scores[2]; }
  int coherence() const { return scores[3]; }
  /// Mean of the four rescaled criteria.
  double accuracy() const;
};

nlohmann::json to_json(const RubricScore& r);

/// Strict parse of the judge's JSON reply; Error(scoring) on any defect.
RubricScore parse_rubric(std::string_view reply);

std::string judge_prompt(const std::string& question, const std::string& answer, const std::string& reference);

/// One structured retry on an unparseable reply, then Error(scoring).
RubricScore judge_response(const std::string& question, const std::string& answer, const std::string& reference,
                           const llm::LlmHandle& judge);

/// Cosine similarity of the two texts' embeddings. Error(scoring) on
/// embedder failure.
double score_semantic_similarity(const std::string& answer, const std::string& reference, llm::Embedder& embedder);

struct BenchConfig {
  std::string model;
  ToolKind tool = ToolKind::context_rag;
  AbstractionLevel level = AbstractionLevel::conceptual;
  /// "model / tool / level"
  std::string label() const;
};

struct EvalRecord {
  std::string qa_id;
  QaCategory category = QaCategory::graph_query_single;
  BenchConfig config;
  std::size_t repetition = 0;
  std::string scope;
  std::string answer;
  std::optional<RubricScore> rubric;
  double accuracy = 0;
  double similarity = 0;
  llm::TokenUsage usage;
  double cost = 0;
  double latency_seconds = 0;
  std::vector<std::string> tools_called;
  bool limit_reached = false;
  bool failed = false;
  std::string error;
};

nlohmann::json to_json(const EvalRecord& r);

struct BenchmarkPlan {
  std::vector<BenchConfig> configs;
  std::size_t repetitions = 2;
  std::string judge_model = "gpt-5-mini";
  AgentLimits limits{6, true, 60000};
  PathRagParams path_defaults;
};

struct BenchmarkEnvironment {
  llm::Gateway* gateway = nullptr;
  /// Defaults to `gateway`.
  llm::Gateway* judge_gateway = nullptr;
  llm::Embedder* embedder = nullptr;
  std::map<AbstractionLevel, std::shared_ptr<const GraphResources>> graphs;
  /// Called after every record.
  std::function<void(const EvalRecord&)> on_record;
};

/// configs x qa x repetitions records in (config, qa, repetition) order.
/// Failures are flagged on their record and the run continues.
std::vector<EvalRecord> run_benchmark(const BenchmarkPlan& plan, const std::vector<QaItem>& qa,
                                      const BenchmarkEnvironment& env);

struct CellStats {
  std::size_t count = 0;
  std::size_t failed = 0;
  double accuracy = 0;
  double similarity = 0;
  double cost = 0;
  double latency_seconds = 0;
};

struct AggregateRow {
  std::string label;
  std::map<QaCategory, CellStats> by_category;
  CellStats overall;
};

/// Per-configuration means over successful records, grouped by category.
/// Rows keep first-appearance order of configurations.
std::vector<AggregateRow> aggregate(const std::vector<EvalRecord>& records);

/// Accuracy, cost per task and execution time tables in Markdown.
std::string render_report(const std::vector<AggregateRow>& rows);
/// "label: 0.91 / $0.004 / 24.33s (n records, f failed)"
std::string render_summary_line(const AggregateRow& row);

/// Mock rules answering every QA item: one call of the offered tool, then
/// the reference answer; the judge scores `judge_scores`.
std::vector<llm::MockRule> mock_bench_rules(const std::vector<QaItem>& qa,
                                            std::array<int, 4> judge_scores = {5, 4, 5, 5});

}  // namespace pidgraph
