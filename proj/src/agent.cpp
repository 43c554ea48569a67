// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/agent.hpp"

#include <ctime>
#include <fstream>

#include "pidgraph/errors.hpp"
#include "pidgraph/graphml.hpp"
#include "pidgraph/prompts.hpp"
#include "pidgraph/text.hpp"

namespace pidgraph {

using nlohmann::json;

namespace {

constexpr AgentEvent::Type kEventTypes[] = {AgentEvent::Type::token, AgentEvent::Type::tool_started,
                                            AgentEvent::Type::tool_finished, AgentEvent::Type::turn_complete,
                                            AgentEvent::Type::error};

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json usage_json(const llm::TokenUsage& u) { return json{{"input_tokens", u.input_tokens}, {"output_tokens", u.output_tokens}}; }

llm::TokenUsage usage_from(const json& j) {
  return llm::TokenUsage{j.value("input_tokens", std::uint64_t{0}), j.value("output_tokens", std::uint64_t{0})};
}

json ledger_json(const ToolLedgerEntry& e) {
  return json{{"turn", e.turn}, {"call_id", e.call_id}, {"tool", e.tool}, {"arguments", e.arguments}, {"ok", e.ok}};
}

ToolLedgerEntry ledger_from(const json& j) {
  return ToolLedgerEntry{j.at("turn").get<std::size_t>(), j.at("call_id").get<std::string>(),
                         j.at("tool").get<std::string>(), j.value("arguments", json::object()), j.value("ok", true)};
}

std::string truncate(std::string text, std::size_t max) {
  if (text.size() <= max) return text;
  text.resize(max);
  return text + "...";
}

}  // namespace

std::string_view to_string(AgentEvent::Type type) {
  switch (type) {
    case AgentEvent::Type::token: return "token";
    case AgentEvent::Type::tool_started: return "tool_started";
    case AgentEvent::Type::tool_finished: return "tool_finished";
    case AgentEvent::Type::turn_complete: return "turn_complete";
    case AgentEvent::Type::error: return "error";
  }
  return "error";
}

AgentEvent::Type parse_event_type(std::string_view text) {
  for (auto t : kEventTypes) {
    if (to_string(t) == text) return t;
  }
  throw Error(ErrorKind::parse, "unknown event type '" + std::string(text) + "'");
}

json to_json(const AgentEvent& e, bool timing) {
  json j{{"type", std::string(to_string(e.type))}};
  switch (e.type) {
    case AgentEvent::Type::token: j["text"] = e.text; break;
    case AgentEvent::Type::tool_started:
      j["tool"] = e.tool;
      j["call_id"] = e.call_id;
      j["arguments"] = e.arguments.is_null() ? json::object() : e.arguments;
      break;
    case AgentEvent::Type::tool_finished:
      j["tool"] = e.tool;
      j["call_id"] = e.call_id;
      j["ok"] = e.ok;
      j["summary"] = e.summary;
      if (timing) j["duration_seconds"] = e.duration_seconds;
      break;
    case AgentEvent::Type::turn_complete:
      j["answer"] = e.text;
      j["usage"] = usage_json(e.usage);
      j["cost"] = e.cost;
      j["limit_reached"] = e.limit_reached;
      break;
    case AgentEvent::Type::error: j["detail"] = e.text; break;
  }
  return j;
}

AgentEvent event_from_json(const json& j) {
  AgentEvent e;
  e.type = parse_event_type(j.at("type").get<std::string>());
  switch (e.type) {
    case AgentEvent::Type::token: e.text = j.at("text").get<std::string>(); break;
    case AgentEvent::Type::tool_started:
      e.tool = j.at("tool").get<std::string>();
      e.call_id = j.value("call_id", "");
      e.arguments = j.value("arguments", json::object());
      break;
    case AgentEvent::Type::tool_finished:
      e.tool = j.at("tool").get<std::string>();
      e.call_id = j.value("call_id", "");
      e.ok = j.value("ok", true);
      e.summary = j.value("summary", "");
      e.duration_seconds = j.value("duration_seconds", 0.0);
      break;
    case AgentEvent::Type::turn_complete:
      e.text = j.at("answer").get<std::string>();
      e.usage = usage_from(j.value("usage", json::object()));
      e.cost = j.value("cost", 0.0);
      e.limit_reached = j.value("limit_reached", false);
      break;
    case AgentEvent::Type::error: e.text = j.at("detail").get<std::string>(); break;
  }
  return e;
}

bool valid_event_sequence(const std::vector<AgentEvent>& events, std::string* why) {
  auto fail = [&](std::string reason) {
    if (why) *why = std::move(reason);
    return false;
  };
  if (events.empty()) return fail("empty sequence");
  std::optional<std::string> open_call;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const bool last = i + 1 == events.size();
    switch (e.type) {
      case AgentEvent::Type::token: break;
      case AgentEvent::Type::tool_started:
        if (open_call) return fail("tool_started at " + std::to_string(i) + " while a tool is running");
        open_call = e.call_id;
        break;
      case AgentEvent::Type::tool_finished:
        if (!open_call) return fail("tool_finished at " + std::to_string(i) + " without tool_started");
        if (*open_call != e.call_id) return fail("tool_finished at " + std::to_string(i) + " has another call id");
        open_call.reset();
        break;
      case AgentEvent::Type::turn_complete:
      case AgentEvent::Type::error:
        if (!last) return fail("terminal event at " + std::to_string(i) + " is not last");
        if (open_call) return fail("turn ended with a running tool");
        break;
    }
  }
  const auto t = events.back().type;
  if (t != AgentEvent::Type::turn_complete && t != AgentEvent::Type::error) return fail("no terminal event");
  return true;
}

std::shared_ptr<const GraphResources> GraphResources::build(std::string graph_id, GraphSnapshot graph) {
  auto global = VectorIndex::build(*graph, IndexName::global_semantic_index);
  auto local = VectorIndex::build(*graph, IndexName::local_semantic_index);
  return std::make_shared<const GraphResources>(
      GraphResources{std::move(graph_id), std::move(graph), std::move(global), std::move(local)});
}

AgentSession::AgentSession(std::string id, std::shared_ptr<const GraphResources> resources,
                           std::filesystem::path log_path)
    : id_(std::move(id)), resources_(std::move(resources)), log_path_(std::move(log_path)), created_at_(utc_now()) {
  if (!resources_) throw Error(ErrorKind::invalid_argument, "session needs a graph");
  if (!log_path_.empty() && !std::filesystem::exists(log_path_)) {
    append_log(json{{"type", "session"},
                    {"id", id_},
                    {"graph_id", resources_->graph_id},
                    {"level", std::string(to_string(resources_->graph->level()))},
                    {"created_at", created_at_}});
  }
}

std::unique_ptr<AgentSession> AgentSession::restore(const std::filesystem::path& log_path,
                                                    std::shared_ptr<const GraphResources> resources) {
  const auto text = read_file(log_path);
  std::unique_ptr<AgentSession> session;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    if (trim(raw).empty()) continue;
    json j;
    try {
      j = json::parse(raw);
    } catch (const json::exception& e) {
      throw PositionedError(ErrorKind::parse, std::string("session log: ") + e.what(), line_no, 1);
    }
    const auto type = j.value("type", "");
    if (type == "session") {
      session = std::make_unique<AgentSession>(j.at("id").get<std::string>(), resources, log_path);
      session->created_at_ = j.value("created_at", session->created_at_);
      continue;
    }
    if (!session) throw PositionedError(ErrorKind::parse, "session log must start with a session record", line_no, 1);
    if (type == "message") {
      session->history_.push_back(llm::message_from_json(j.at("message")));
    } else if (type == "turn") {
      TurnResult t;
      t.turn = j.at("turn").get<std::size_t>();
      t.scope = j.value("scope", "");
      t.answer = j.value("answer", "");
      t.usage = usage_from(j.value("usage", json::object()));
      t.cost = j.value("cost", 0.0);
      t.limit_reached = j.value("limit_reached", false);
      t.latency_seconds = j.value("latency_seconds", 0.0);
      for (const auto& c : j.value("tool_calls", json::array())) {
        t.tool_calls.push_back(ledger_from(c));
        session->ledger_.push_back(t.tool_calls.back());
      }
      session->turns_.push_back(std::move(t));
    } else if (type == "turn_failed") {
      TurnResult t;
      t.turn = j.at("turn").get<std::size_t>();
      t.failed = true;
      t.error = j.value("error", "");
      session->turns_.push_back(std::move(t));
    }
  }
  if (!session) throw Error(ErrorKind::parse, "session log " + log_path.string() + " is empty");
  return session;
}

std::vector<llm::Message> AgentSession::history() const {
  std::lock_guard lock(mu_);
  return history_;
}

std::vector<ToolLedgerEntry> AgentSession::tool_ledger() const {
  std::lock_guard lock(mu_);
  return ledger_;
}

std::vector<TurnResult> AgentSession::turns() const {
  std::lock_guard lock(mu_);
  return turns_;
}

std::size_t AgentSession::turn_count() const {
  std::lock_guard lock(mu_);
  return turns_.size();
}

void AgentSession::append_log(const json& line) {
  if (log_path_.empty()) return;
  std::ofstream out(log_path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot append to session log " + log_path_.string());
  out << line.dump() << '\n';
}

void AgentSession::commit_turn(const TurnResult& result, const std::vector<llm::Message>& messages) {
  std::lock_guard lock(mu_);
  for (const auto& m : messages) {
    history_.push_back(m);
    append_log(json{{"type", "message"}, {"turn", result.turn}, {"message", llm::to_json(m)}});
  }
  json calls = json::array();
  for (const auto& c : result.tool_calls) {
    ledger_.push_back(c);
    calls.push_back(ledger_json(c));
  }
  append_log(json{{"type", "turn"},
                  {"turn", result.turn},
                  {"scope", result.scope},
                  {"answer", result.answer},
                  {"usage", usage_json(result.usage)},
                  {"cost", result.cost},
                  {"limit_reached", result.limit_reached},
                  {"latency_seconds", result.latency_seconds},
                  {"tool_calls", calls}});
  turns_.push_back(result);
}

void AgentSession::record_failure(const TurnResult& result) {
  std::lock_guard lock(mu_);
  append_log(json{{"type", "turn_failed"}, {"turn", result.turn}, {"scope", result.scope}, {"error", result.error}});
  turns_.push_back(result);
}

std::size_t message_tokens(const llm::Message& m) {
  std::size_t n = estimate_tokens(m.content);
  for (const auto& c : m.tool_calls) n += estimate_tokens(c.name + c.arguments.dump());
  return n;
}

std::vector<llm::Message> memory_window(const std::vector<llm::Message>& history, std::size_t token_budget) {
  // turn boundaries: every user message opens a turn
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (history[i].role == llm::Role::user) starts.push_back(i);
  }
  if (starts.empty() || starts.front() != 0) starts.insert(starts.begin(), 0);
  std::size_t total = 0;
  for (const auto& m : history) total += message_tokens(m);
  std::size_t first = 0;
  for (std::size_t t = 0; t + 1 < starts.size() && total > token_budget; ++t) {
    for (std::size_t i = starts[t]; i < starts[t + 1]; ++i) total -= message_tokens(history[i]);
    first = starts[t + 1];
  }
  return {history.begin() + static_cast<std::ptrdiff_t>(first), history.end()};
}

std::string summarize(const ToolResult& result) {
  return std::visit(
      [&](const auto& payload) -> std::string {
        using T = std::decay_t<decltype(payload)>;
        if constexpr (std::is_same_v<T, std::vector<ScoredNode>>) {
          if (payload.empty()) return "no nodes";
          return std::to_string(payload.size()) + " node(s), best " + payload.front().node_id + " (" +
                 format_double(payload.front().score) + ")";
        } else if constexpr (std::is_same_v<T, PathRagOutcome>) {
          return std::to_string(payload.traces.size()) + " path(s), answer: " + truncate(payload.answer, 120);
        } else if constexpr (std::is_same_v<T, CypherRagOutcome>) {
          return std::to_string(payload.table.rows.size()) + " row(s) from " + truncate(payload.query, 160);
        } else {
          return std::to_string(result.content.size()) + " characters (~" + std::to_string(result.token_estimate) +
                 " tokens)";
        }
      },
      result.structured);
}

Agent::Agent(llm::Gateway& gateway, llm::Embedder& embedder, AgentConfig config)
    : gateway_(gateway), embedder_(embedder), config_(std::move(config)) {
  if (config_.limits.max_tool_calls == 0) {
    throw Error(ErrorKind::configuration, "max tool calls per turn must be positive");
  }
  config_.path_defaults.validate();
  if (config_.tools.empty()) {
    config_.tools = {ToolKind::context_rag, ToolKind::vector_rag, ToolKind::path_rag, ToolKind::cypher_rag};
  }
}

std::string Agent::system_prompt(const Graph& graph) const {
  std::vector<std::pair<std::string, std::string>> slots{{"level", std::string(to_string(graph.level()))}};
  if (!config_.system_prompt.empty()) return fill_template(config_.system_prompt, slots);
  return render_prompt("agent_system", slots);
}

TurnResult Agent::run_turn(AgentSession& session, const std::string& user_message, const EventSink& sink) {
  const auto started = std::chrono::steady_clock::now();
  TurnResult result;
  result.turn = session.turn_count() + 1;
  result.scope = session.id() + "/" + std::to_string(result.turn);

  auto emit = [&](AgentEvent e) {
    result.events.push_back(e);
    if (sink) sink(result.events.back());
  };

  const auto& res = session.resources();
  RetrievalContext context;
  context.graph = res.graph;
  context.global_index = &res.global_index;
  context.local_index = &res.local_index;
  context.embedder = &embedder_;
  context.llm = llm::LlmHandle{&gateway_, config_.model, result.scope, config_.temperature};
  context.path_defaults = config_.path_defaults;
  context.default_top_k = config_.default_top_k;

  const auto system = llm::Message::system(system_prompt(*res.graph));
  auto history = session.history();
  const auto base = history.size();
  history.push_back(llm::Message::user(user_message));

  const auto descriptors = tool_descriptors();
  std::set<std::string> enabled;
  for (auto t : config_.tools) enabled.insert(std::string(to_string(t)));
  std::set<std::string> used;
  std::size_t executed = 0;
  const std::size_t max_rounds = config_.limits.max_tool_calls + 2;

  try {
    for (std::size_t round = 1;; ++round) {
      std::vector<llm::ToolDescriptor> offered;
      if (executed >= config_.limits.max_tool_calls) result.limit_reached = true;
      if (!result.limit_reached && round <= max_rounds) {
        for (const auto& d : descriptors) {
          if (!enabled.count(d.name)) continue;
          if (config_.limits.benchmark_mode && used.count(d.name)) continue;
          offered.push_back(d);
        }
      }

      llm::ChatRequest request;
      request.model = config_.model;
      request.messages.push_back(system);
      for (auto& m : memory_window(history, config_.limits.memory_token_budget)) request.messages.push_back(std::move(m));
      request.tools = offered;
      request.temperature = config_.temperature;
      request.max_output_tokens = config_.max_output_tokens;
      request.purpose = "agent";

      auto response = gateway_.chat(request, result.scope, [&](std::string_view chunk) {
        AgentEvent e;
        e.type = AgentEvent::Type::token;
        e.text = std::string(chunk);
        emit(std::move(e));
      });

      if (response.tool_calls.empty() || offered.empty()) {
        result.answer = response.content;
        history.push_back(llm::Message::assistant(response.content));
        break;
      }
      history.push_back(llm::Message::assistant(response.content, response.tool_calls));

      for (const auto& call : response.tool_calls) {
        AgentEvent start;
        start.type = AgentEvent::Type::tool_started;
        start.tool = call.name;
        start.call_id = call.id;
        start.arguments = call.arguments;
        emit(start);
        const auto t0 = std::chrono::steady_clock::now();

        AgentEvent done;
        done.type = AgentEvent::Type::tool_finished;
        done.tool = call.name;
        done.call_id = call.id;
        std::string output;
        const bool offered_now =
            std::any_of(offered.begin(), offered.end(), [&](const auto& d) { return d.name == call.name; });
        if (executed >= config_.limits.max_tool_calls) {
          result.limit_reached = true;
          done.ok = false;
          done.summary = "refused: limit of " + std::to_string(config_.limits.max_tool_calls) + " tool calls reached";
          output = "Refused: the limit of " + std::to_string(config_.limits.max_tool_calls) +
                   " tool calls for this question is reached. Answer with the information gathered so far.";
        } else if (config_.limits.benchmark_mode && used.count(call.name)) {
          done.ok = false;
          done.summary = "refused: " + call.name + " was already called in this turn";
          output = "Refused: " + call.name +
                   " was already called for this question and each tool can be called only once. Use the "
                   "information already retrieved.";
        } else if (!offered_now) {
          done.ok = false;
          done.summary = "refused: " + call.name + " is not available";
          output = "Error: tool '" + call.name + "' is not available.";
        } else {
          ++executed;
          used.insert(call.name);
          ToolLedgerEntry entry{result.turn, call.id, call.name, call.arguments, true};
          try {
            auto tool_result = run_tool(call.name, call.arguments, context);
            output = tool_result.content;
            done.summary = summarize(tool_result);
          } catch (const std::exception& e) {
            entry.ok = false;
            done.ok = false;
            done.summary = std::string("failed: ") + e.what();
            output = std::string("Error: ") + e.what();
          }
          result.tool_calls.push_back(std::move(entry));
        }
        done.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        emit(done);
        history.push_back(llm::Message::tool(call.id, call.name, output));
      }
    }
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = e.what();
    result.usage = gateway_.ledger().usage_for(result.scope);
    result.cost = gateway_.ledger().cost_for(result.scope);
    result.latency_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    AgentEvent err;
    err.type = AgentEvent::Type::error;
    err.text = e.what();
    emit(std::move(err));
    session.record_failure(result);
    return result;
  }

  result.usage = gateway_.ledger().usage_for(result.scope);
  result.cost = gateway_.ledger().cost_for(result.scope);
  result.latency_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  AgentEvent complete;
  complete.type = AgentEvent::Type::turn_complete;
  complete.text = result.answer;
  complete.usage = result.usage;
  complete.cost = result.cost;
  complete.limit_reached = result.limit_reached;
  emit(std::move(complete));
  session.commit_turn(result, std::vector<llm::Message>(history.begin() + static_cast<std::ptrdiff_t>(base),
                                                        history.end()));
  return result;
}

}  // namespace pidgraph
