// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "pidgraph/llm/gateway.hpp"
#include "pidgraph/retrieval.hpp"

namespace pidgraph {

struct AgentEvent {
  enum class Type { token, tool_started, tool_finished, turn_complete, error };

  Type type = Type::token;
  /// token text, final answer or error detail
  std::string text;
  std::string tool;
  std::string call_id;
  nlohmann::json arguments;
  /// tool_finished: short description of the result
  std::string summary;
  bool ok = true;
  double duration_seconds = 0;
  llm::TokenUsage usage;
  double cost = 0;
  bool limit_reached = false;
};

std::string_view to_string(AgentEvent::Type type);
AgentEvent::Type parse_event_type(std::string_view text);
/// Wire form: {"type": ..., variant fields}. Durations are omitted when
/// `timing` is false so replays compare equal.
nlohmann::json to_json(const AgentEvent& event, bool timing = true);
AgentEvent event_from_json(const nlohmann::json& j);

/// (token* (tool_started token* tool_finished)* token*)* then exactly one
/// turn_complete or error, with matching call ids in each pair.
bool valid_event_sequence(const std::vector<AgentEvent>& events, std::string* why = nullptr);

using EventSink = std::function<void(const AgentEvent&)>;

/// A graph snapshot with its two vector indexes.
struct GraphResources {
  std::string graph_id;
  GraphSnapshot graph;
  VectorIndex global_index;
  VectorIndex local_index;

  static std::shared_ptr<const GraphResources> build(std::string graph_id, GraphSnapshot graph);
};

struct AgentLimits {
  std::size_t max_tool_calls = 6;
  /// Each tool at most once per turn.
  bool benchmark_mode = false;
  /// Token budget of the history passed to the model.
  std::size_t memory_token_budget = 60000;
};

struct AgentConfig {
  std::string model = "gpt-5-mini";
  std::optional<double> temperature;
  std::optional<std::uint32_t> max_output_tokens;
  AgentLimits limits;
  /// Tools offered to the model; all four when empty.
  std::vector<ToolKind> tools;
  PathRagParams path_defaults;
  std::size_t default_top_k = 5;
  /// Overrides the shipped agent_system template when set.
  std::string system_prompt;
};

struct ToolLedgerEntry {
  std::size_t turn = 0;
  std::string call_id;
  std::string tool;
  nlohmann::json arguments;
  bool ok = true;
};

struct TurnResult {
  std::size_t turn = 0;
  std::string scope;
  std::string answer;
  llm::TokenUsage usage;
  double cost = 0;
  bool limit_reached = false;
  bool failed = false;
  std::string error;
  std::vector<AgentEvent> events;
  std::vector<ToolLedgerEntry> tool_calls;
  double latency_seconds = 0;
};

/// Conversation state bound to one immutable graph snapshot. Completed
/// turns are appended to a JSONL log when a path is set.
class AgentSession {
 public:
  AgentSession(std::string id, std::shared_ptr<const GraphResources> resources,
               std::filesystem::path log_path = {});

  /// Rebuilds history from a log written by a previous process.
  static std::unique_ptr<AgentSession> restore(const std::filesystem::path& log_path,
                                               std::shared_ptr<const GraphResources> resources);

  const std::string& id() const { return id_; }
  const GraphResources& resources() const { return *resources_; }
  std::shared_ptr<const GraphResources> resources_ptr() const { return resources_; }
  const std::string& created_at() const { return created_at_; }

  std::vector<llm::Message> history() const;
  std::vector<ToolLedgerEntry> tool_ledger() const;
  std::vector<TurnResult> turns() const;
  std::size_t turn_count() const;

  /// Called by Agent only.
  void commit_turn(const TurnResult& result, const std::vector<llm::Message>& messages);
  void record_failure(const TurnResult& result);

 private:
  void append_log(const nlohmann::json& line);

  std::string id_;
  std::shared_ptr<const GraphResources> resources_;
  std::filesystem::path log_path_;
  std::string created_at_;
  mutable std::mutex mu_;
  std::vector<llm::Message> history_;
  std::vector<ToolLedgerEntry> ledger_;
  std::vector<TurnResult> turns_;
};

/// History trimmed to `token_budget` by evicting whole turns oldest-first.
/// The newest turn is always kept, so tool calls and their results are
/// never separated.
std::vector<llm::Message> memory_window(const std::vector<llm::Message>& history, std::size_t token_budget);
std::size_t message_tokens(const llm::Message& m);

/// Tool-calling loop over one gateway.
class Agent {
 public:
  Agent(llm::Gateway& gateway, llm::Embedder& embedder, AgentConfig config);

  /// Runs one turn, emitting events to `sink` as they happen. Provider
  /// failures end the turn with an error event and leave history unchanged.
  TurnResult run_turn(AgentSession& session, const std::string& user_message, const EventSink& sink = {});

  const AgentConfig& config() const { return config_; }
  std::string system_prompt(const Graph& graph) const;

 private:
  llm::Gateway& gateway_;
  llm::Embedder& embedder_;
  AgentConfig config_;
};

/// One-line description of a tool result for tool_finished events.
std::string summarize(const ToolResult& result);

}  // namespace pidgraph
