// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fixtures.hpp"
#include "pidgraph/agent.hpp"
#include "pidgraph/errors.hpp"
#include "pidgraph/graphml.hpp"
#include "pidgraph/llm/mock.hpp"

using namespace pidgraph;
using namespace pidgraph::llm;
using nlohmann::json;

namespace {

std::shared_ptr<const GraphResources> enriched_flowsheet() {
  static const auto res = [] {
    auto g = fixtures::flowsheet();
    MockEmbedder e;
    for (const auto& id : g.sorted_node_ids()) {
      const auto text = node_context(g, id);
      g.set_semantics(id, text, text);
      g.set_embeddings(id, e.encode(text), e.encode(text));
    }
    return GraphResources::build("flowsheet", std::make_shared<const Graph>(std::move(g)));
  }();
  return res;
}

MockRule call_tool(const std::string& tool, json args, std::optional<std::string> before = {}) {
  MockRule r;
  r.when.purpose = "agent";
  r.when.has_tools = true;
  r.when.before_tool = before;
  r.reply.tool_calls.push_back(ToolCall{"", tool, std::move(args)});
  return r;
}

MockRule answer(std::string text, std::optional<std::string> after = {}) {
  MockRule r;
  r.when.purpose = "agent";
  r.when.after_tool = std::move(after);
  r.reply.content = std::move(text);
  return r;
}

CostModel prices() {
  CostModel c;
  c.set_price("gpt-5-mini", {0.25, 2.0});
  return c;
}

struct Rig {
  explicit Rig(std::vector<MockRule> rules, AgentLimits limits = {})
      : provider(std::make_shared<MockProvider>(std::move(rules))), gateway(provider, prices()) {
    AgentConfig cfg;
    cfg.limits = limits;
    agent = std::make_unique<Agent>(gateway, embedder, cfg);
  }
  std::shared_ptr<MockProvider> provider;
  Gateway gateway;
  MockEmbedder embedder;
  std::unique_ptr<Agent> agent;
};

std::vector<std::string> types(const TurnResult& r) {
  std::vector<std::string> out;
  for (const auto& e : r.events) {
    auto t = std::string(to_string(e.type));
    if (t == "token" && !out.empty() && out.back() == "token") continue;
    out.push_back(t);
  }
  return out;
}

AgentEvent ev(AgentEvent::Type t, std::string call = {}) {
  AgentEvent e;
  e.type = t;
  e.call_id = std::move(call);
  return e;
}

}  // namespace

TEST_CASE("vector_rag then answer produces the expected event sequence") {
  Rig rig({call_tool("vector_rag", {{"query", "{{last_user}}"}}, "vector_rag"),
           answer("T4750 is protected by PSV4750 set at 6.0 bar.", "vector_rag")});
  AgentSession session("s1", enriched_flowsheet());
  std::vector<AgentEvent> streamed;
  auto r = rig.agent->run_turn(session, "What protects T4750?", [&](const AgentEvent& e) { streamed.push_back(e); });
  CHECK_FALSE(r.failed);
  CHECK(types(r) == std::vector<std::string>{"tool_started", "tool_finished", "token", "turn_complete"});
  CHECK(r.tool_calls.size() == 1);
  CHECK(r.tool_calls[0].tool == "vector_rag");
  CHECK(r.tool_calls[0].arguments.at("query") == "What protects T4750?");
  CHECK(r.answer == "T4750 is protected by PSV4750 set at 6.0 bar.");
  CHECK(valid_event_sequence(r.events));
  REQUIRE(streamed.size() == r.events.size());
  std::string tokens;
  for (const auto& e : r.events) {
    if (e.type == AgentEvent::Type::token) tokens += e.text;
  }
  CHECK(tokens == r.answer);
  CHECK(r.events.back().text == r.answer);
  CHECK(r.events[1].ok);
  CHECK(r.events[1].summary.find("node(s)") != std::string::npos);

  auto h = session.history();
  REQUIRE(h.size() == 4);
  CHECK(h[0].role == Role::user);
  CHECK(h[1].tool_calls.size() == 1);
  CHECK(h[2].role == Role::tool);
  CHECK(h[3].content == r.answer);
  CHECK(session.tool_ledger().size() == 1);
}

TEST_CASE("direct answers emit no tool events") {
  Rig rig({answer("Hello, ask me about the P&ID.")});
  AgentSession session("s", enriched_flowsheet());
  auto r = rig.agent->run_turn(session, "hi");
  CHECK(types(r) == std::vector<std::string>{"token", "turn_complete"});
  CHECK(r.tool_calls.empty());
  CHECK_FALSE(r.limit_reached);
}

TEST_CASE("benchmark mode refuses a repeated tool") {
  AgentLimits limits{6, true, 60000};
  MockRule again = call_tool("context_rag", {{"mode", "graph"}});
  again.when.has_tools = std::nullopt;
  again.times = 2;
  Rig rig({again, answer("The tank is T4750.")}, limits);
  AgentSession session("b", enriched_flowsheet());
  auto r = rig.agent->run_turn(session, "Which tank?");
  CHECK(valid_event_sequence(r.events));
  REQUIRE(r.tool_calls.size() == 1);
  std::vector<const AgentEvent*> finished;
  for (const auto& e : r.events) {
    if (e.type == AgentEvent::Type::tool_finished) finished.push_back(&e);
  }
  REQUIRE(finished.size() == 2);
  CHECK(finished[0]->ok);
  CHECK_FALSE(finished[1]->ok);
  CHECK(finished[1]->summary.find("already called") != std::string::npos);
  auto h = session.history();
  std::size_t refusals = 0;
  for (const auto& m : h) {
    if (m.role == Role::tool && m.content.rfind("Refused:", 0) == 0) ++refusals;
  }
  CHECK(refusals == 1);
  CHECK(r.answer == "The tank is T4750.");
}

TEST_CASE("chat mode stops at the tool call ceiling") {
  AgentLimits limits{3, false, 60000};
  MockRule loop = call_tool("cypher_rag", {{"query", "count tanks"}});
  MockRule gen;
  gen.when.purpose = "generate_cypher";
  gen.reply.content = "MATCH (n:Tank) RETURN count(n)";
  MockRule ans;
  ans.when.purpose = "cypher_answer";
  ans.reply.content = "One tank.";
  Rig rig({gen, ans, loop, answer("There is one tank.")}, limits);
  AgentSession session("c", enriched_flowsheet());
  auto r = rig.agent->run_turn(session, "How many tanks?");
  CHECK(r.tool_calls.size() == 3);
  CHECK(r.limit_reached);
  CHECK(r.answer == "There is one tank.");
  CHECK(r.events.back().limit_reached);
  CHECK(valid_event_sequence(r.events));
  auto last = json::parse(rig.provider->transcript().back());
  CHECK(last.at("purpose") == "agent");
}

TEST_CASE("tool failures are reported and the loop continues") {
  MockRule bad = call_tool("cypher_rag", {{"query", "q"}}, "cypher_rag");
  MockRule gen;
  gen.when.purpose = "generate_cypher";
  gen.reply.content = "MATCH (n:Tank RETURN n";
  Rig rig({gen, bad, answer("I could not query the graph.", "cypher_rag")});
  AgentSession session("f", enriched_flowsheet());
  auto r = rig.agent->run_turn(session, "Which tanks?");
  CHECK_FALSE(r.failed);
  REQUIRE(r.tool_calls.size() == 1);
  CHECK_FALSE(r.tool_calls[0].ok);
  CHECK(types(r) == std::vector<std::string>{"tool_started", "tool_finished", "token", "turn_complete"});
  CHECK_FALSE(r.events[1].ok);
  CHECK(r.events[1].summary.find("column") != std::string::npos);
  CHECK(session.history()[2].content.rfind("Error: ", 0) == 0);
}

TEST_CASE("provider failures end the turn with an error and keep history") {
  Rig rig({});
  AgentSession session("e", enriched_flowsheet());
  auto r = rig.agent->run_turn(session, "anything");
  CHECK(r.failed);
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].type == AgentEvent::Type::error);
  CHECK(valid_event_sequence(r.events));
  CHECK(session.history().empty());
  CHECK(session.turn_count() == 1);
}

TEST_CASE("replay determinism over three runs") {
  auto run = [] {
    Rig rig({call_tool("vector_rag", {{"query", "{{last_user}}"}}, "vector_rag"),
             call_tool("context_rag", {{"mode", "topology"}}, "context_rag"), answer("Done.", "context_rag")});
    AgentSession session("r", enriched_flowsheet());
    std::vector<std::string> lines;
    for (const auto* q : {"Where is P4711?", "And P4712?"}) {
      auto r = rig.agent->run_turn(session, q);
      for (const auto& e : r.events) lines.push_back(to_json(e, false).dump());
    }
    return std::pair{lines, rig.provider->transcript()};
  };
  auto a = run();
  CHECK(a == run());
  CHECK(a == run());
  CHECK(a.first.size() > 4);
}

TEST_CASE("turn cost equals the ledger records of the turn") {
  Rig rig({call_tool("vector_rag", {{"query", "{{last_user}}"}}, "vector_rag"), answer("ok", "vector_rag")});
  AgentSession session("cost", enriched_flowsheet());
  for (int i = 0; i < 2; ++i) {
    const auto before = rig.gateway.ledger().size();
    auto r = rig.agent->run_turn(session, "q" + std::to_string(i));
    const auto records = rig.gateway.ledger().records();
    double cost = 0;
    TokenUsage usage;
    for (std::size_t k = before; k < records.size(); ++k) {
      CHECK(records[k].scope == r.scope);
      cost += records[k].cost;
      usage += records[k].usage;
    }
    // the second turn answers directly because the tool already ran earlier in the history
    CHECK(records.size() - before == (i == 0 ? 2u : 1u));
    CHECK(r.events.back().cost == doctest::Approx(cost).epsilon(1e-12));
    CHECK(r.events.back().usage == usage);
    CHECK(r.cost > 0);
  }
}

TEST_CASE("event grammar") {
  using T = AgentEvent::Type;
  CHECK(valid_event_sequence({ev(T::token), ev(T::turn_complete)}));
  CHECK(valid_event_sequence({ev(T::tool_started, "a"), ev(T::token), ev(T::tool_finished, "a"), ev(T::token),
                              ev(T::tool_started, "b"), ev(T::tool_finished, "b"), ev(T::turn_complete)}));
  CHECK(valid_event_sequence({ev(T::error)}));
  CHECK_FALSE(valid_event_sequence({}));
  CHECK_FALSE(valid_event_sequence({ev(T::token)}));
  CHECK_FALSE(valid_event_sequence({ev(T::turn_complete), ev(T::token)}));
  CHECK_FALSE(valid_event_sequence({ev(T::tool_started, "a"), ev(T::turn_complete)}));
  CHECK_FALSE(valid_event_sequence({ev(T::tool_started, "a"), ev(T::tool_finished, "b"), ev(T::turn_complete)}));
  CHECK_FALSE(valid_event_sequence({ev(T::tool_finished, "a"), ev(T::turn_complete)}));
  CHECK_FALSE(valid_event_sequence({ev(T::tool_started, "a"), ev(T::tool_started, "b"), ev(T::tool_finished, "b"),
                                    ev(T::tool_finished, "a"), ev(T::turn_complete)}));
  CHECK_FALSE(valid_event_sequence({ev(T::turn_complete), ev(T::turn_complete)}));
}

TEST_CASE("event wire form round-trips") {
  AgentEvent e;
  e.type = AgentEvent::Type::tool_finished;
  e.tool = "path_rag";
  e.call_id = "c7";
  e.summary = "2 path(s)";
  e.duration_seconds = 0.25;
  e.ok = false;
  auto j = to_json(e);
  CHECK(j.at("type") == "tool_finished");
  CHECK(j.at("duration_seconds") == 0.25);
  CHECK_FALSE(to_json(e, false).contains("duration_seconds"));
  auto back = event_from_json(j);
  CHECK(back.tool == "path_rag");
  CHECK(back.call_id == "c7");
  CHECK_FALSE(back.ok);
  CHECK(to_json(back) == j);
  AgentEvent done;
  done.type = AgentEvent::Type::turn_complete;
  done.text = "answer";
  done.usage = {10, 2};
  done.cost = 0.5;
  CHECK(to_json(event_from_json(to_json(done))) == to_json(done));
  CHECK_THROWS_AS(event_from_json(json{{"type", "mystery"}}), Error);
}

TEST_CASE("memory_window examples") {
  const std::string forty(40, 'x');  // 10 tokens
  std::vector<Message> h{Message::user(forty), Message::assistant(forty), Message::user(forty),
                         Message::assistant(forty)};
  CHECK(memory_window(h, 40) == h);
  CHECK(memory_window(h, 1000) == h);
  auto w = memory_window(h, 39);
  REQUIRE(w.size() == 2);
  CHECK(w[0] == h[2]);
  // the newest turn survives even when alone over budget
  CHECK(memory_window(h, 5).size() == 2);

  std::vector<Message> tools{Message::user(forty),
                             Message::assistant("", {ToolCall{"c1", "vector_rag", json{{"query", "q"}}}}),
                             Message::tool("c1", "vector_rag", forty),
                             Message::assistant(forty),
                             Message::user(forty),
                             Message::assistant(forty)};
  std::size_t total = 0;
  for (const auto& m : tools) total += message_tokens(m);
  CHECK(message_tokens(tools[1]) == (std::string("vector_rag") + json{{"query", "q"}}.dump()).size() / 4 + 1);
  auto trimmed = memory_window(tools, total - 1);
  REQUIRE(trimmed.size() == 2);
  CHECK(trimmed[0] == tools[4]);
  for (const auto& m : trimmed) CHECK(m.role != Role::tool);
  CHECK(memory_window(tools, total) == tools);
}

TEST_CASE("sessions persist and restore from their log") {
  auto dir = std::filesystem::temp_directory_path() / "pidgraph_agent_restore";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto log = dir / "s9.jsonl";
  Rig rig({call_tool("vector_rag", {{"query", "{{last_user}}"}}, "vector_rag"), answer("first", "vector_rag")});
  {
    AgentSession session("s9", enriched_flowsheet(), log);
    rig.agent->run_turn(session, "one");
    rig.agent->run_turn(session, "two");
    auto restored = AgentSession::restore(log, enriched_flowsheet());
    CHECK(restored->id() == "s9");
    CHECK(restored->history() == session.history());
    CHECK(restored->turn_count() == 2);
    CHECK(restored->tool_ledger().size() == session.tool_ledger().size());
    CHECK(restored->created_at() == session.created_at());
    auto turns = restored->turns();
    CHECK(turns[1].answer == session.turns()[1].answer);
    CHECK(turns[1].cost == doctest::Approx(session.turns()[1].cost));
  }
  auto restored = AgentSession::restore(log, enriched_flowsheet());
  auto r = rig.agent->run_turn(*restored, "three");
  CHECK(r.turn == 3);
  CHECK(AgentSession::restore(log, enriched_flowsheet())->turn_count() == 3);
  CHECK_THROWS_AS(AgentSession::restore(dir / "missing.jsonl", enriched_flowsheet()), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("system prompt names the abstraction level and tools can be restricted") {
  auto provider = std::make_shared<MockProvider>(std::vector<MockRule>{answer("ok")});
  Gateway gw(provider, prices());
  MockEmbedder e;
  AgentConfig cfg;
  cfg.tools = {ToolKind::cypher_rag};
  Agent agent(gw, e, cfg);
  CHECK(agent.system_prompt(*enriched_flowsheet()->graph).find("(complete level)") != std::string::npos);
  AgentSession session("t", enriched_flowsheet());
  agent.run_turn(session, "q");
  auto j = json::parse(provider->transcript().front());
  CHECK(j.at("messages")[0].at("role") == "system");
  AgentConfig zero;
  zero.limits.max_tool_calls = 0;
  CHECK_THROWS_AS(Agent(gw, e, zero), Error);
}
