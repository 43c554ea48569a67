// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "pidgraph/agent.hpp"
#include "pidgraph/chat_service.hpp"
#include "pidgraph/condense.hpp"
#include "pidgraph/cypher/executor.hpp"
#include "pidgraph/enrichment.hpp"
#include "pidgraph/errors.hpp"
#include "pidgraph/evaluation.hpp"
#include "pidgraph/graphml.hpp"
#include "pidgraph/llm/config.hpp"
#include "pidgraph/llm/mock.hpp"
#include "pidgraph/text.hpp"

namespace pidgraph {

using nlohmann::json;

namespace {

std::mutex g_serve_mu;
ChatService* g_serving = nullptr;
bool g_shutdown_requested = false;

struct Runtime {
  llm::GatewayConfig config;
  std::shared_ptr<llm::ChatProvider> provider;
  std::shared_ptr<llm::Embedder> embedder;
  std::unique_ptr<llm::Gateway> gateway;
};

llm::GatewayConfig load_config(const std::string& path) {
  if (!path.empty()) return llm::GatewayConfig::load(path);
  if (const char* env = std::getenv("PIDGRAPH_CONFIG"); env && *env) return llm::GatewayConfig::load(env);
  return llm::GatewayConfig::mock_defaults();
}

Runtime make_runtime(llm::GatewayConfig config, std::shared_ptr<llm::ChatProvider> provider = nullptr) {
  Runtime rt;
  rt.config = std::move(config);
  rt.provider = provider ? std::move(provider) : llm::make_provider(rt.config.chat);
  rt.embedder = llm::make_embedder(rt.config.embedder);
  rt.gateway = std::make_unique<llm::Gateway>(rt.provider, llm::CostModel::load(rt.config.prices),
                                              rt.config.chat.parallelism);
  return rt;
}

void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw Error(ErrorKind::io, "no such file: " + path);
}

std::string first_line(std::string text) {
  auto nl = text.find('\n');
  if (nl != std::string::npos) text = text.substr(0, nl);
  return text;
}

/// Renders agent events for a terminal.
class TerminalRenderer {
 public:
  explicit TerminalRenderer(std::ostream& out) : out_(out) {}

  void operator()(const AgentEvent& e) {
    switch (e.type) {
      case AgentEvent::Type::token:
        out_ << e.text << std::flush;
        break;
      case AgentEvent::Type::tool_started:
        out_ << "\n[" << e.tool << " " << e.arguments.dump() << "]\n" << std::flush;
        break;
      case AgentEvent::Type::tool_finished:
        out_ << "[" << e.tool << (e.ok ? " ok" : " failed") << ": " << e.summary << "]\n" << std::flush;
        break;
      case AgentEvent::Type::turn_complete:
        out_ << fmt::format("\n({} in / {} out tokens, ${:.4f}{})\n", e.usage.input_tokens, e.usage.output_tokens,
                            e.cost, e.limit_reached ? ", tool limit reached" : "");
        break;
      case AgentEvent::Type::error:
        out_ << "\n[error] " << e.text << "\n";
        break;
    }
  }

 private:
  std::ostream& out_;
};

AgentConfig agent_config(const Runtime& rt, std::size_t max_tool_calls, bool benchmark,
                         const std::vector<std::string>& tools) {
  AgentConfig cfg;
  cfg.model = rt.config.chat.model;
  cfg.temperature = rt.config.chat.temperature;
  cfg.limits.max_tool_calls = max_tool_calls;
  cfg.limits.benchmark_mode = benchmark;
  for (const auto& t : tools) cfg.tools.push_back(parse_tool(t));
  return cfg;
}

std::map<AbstractionLevel, std::shared_ptr<const GraphResources>> bench_graphs(
    const json& plan, const std::filesystem::path& base, const std::vector<BenchConfig>& configs) {
  std::map<AbstractionLevel, GraphSnapshot> loaded;
  for (const auto& [level, path] : plan.at("graphs").items()) {
    auto file = base / path.get<std::string>();
    require_file(file.string());
    auto g = std::make_shared<const Graph>(load_graphml_file(file));
    if (g->level() != parse_level(level)) {
      throw Error(ErrorKind::configuration, fmt::format("graph {} is at the {} level, not {}", file.string(),
                                                        to_string(g->level()), level));
    }
    loaded[g->level()] = g;
  }
  if (loaded.empty()) throw Error(ErrorKind::configuration, "plan lists no graphs");
  for (const auto& c : configs) {
    if (loaded.count(c.level)) continue;
    auto below = loaded.lower_bound(c.level);
    if (below == loaded.begin()) {
      throw Error(ErrorKind::configuration,
                  fmt::format("no graph at or below the {} level to condense from", to_string(c.level)));
    }
    --below;
    loaded[c.level] = std::make_shared<const Graph>(condense(*below->second, c.level));
  }
  std::map<AbstractionLevel, std::shared_ptr<const GraphResources>> out;
  for (const auto& [level, g] : loaded) out[level] = GraphResources::build("bench", g);
  return out;
}

int run_bench(const std::string& plan_path, const std::string& out_dir, const std::string& config_path,
              std::ostream& out) {
  require_file(plan_path);
  const auto base = std::filesystem::absolute(plan_path).parent_path();
  json plan;
  try {
    plan = json::parse(read_file(plan_path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::configuration, "plan " + plan_path + ": " + e.what());
  }
  static const std::set<std::string> known{"gateway", "graphs", "qa_set", "repetitions", "configurations",
                                           "judge_model", "max_tool_calls", "mock_script", "note"};
  for (const auto& [key, value] : plan.items()) {
    if (!known.count(key)) throw Error(ErrorKind::configuration, "plan: unknown key '" + key + "'");
  }
  auto config = plan.contains("gateway") ? llm::GatewayConfig::load(base / plan.at("gateway").get<std::string>())
                                         : load_config(config_path);
  const auto qa_path = plan.contains("qa_set") ? base / plan.at("qa_set").get<std::string>()
                                               : llm::data_dir() / "qa_set.jsonl";
  const auto qa = load_qa_set(qa_path);

  BenchmarkPlan bp;
  bp.repetitions = plan.value("repetitions", std::size_t{2});
  bp.judge_model = plan.value("judge_model", config.judge.model);
  bp.limits.max_tool_calls = plan.value("max_tool_calls", std::size_t{6});
  if (!plan.contains("configurations") || plan.at("configurations").empty()) {
    throw Error(ErrorKind::configuration, "plan lists no configurations");
  }
  for (const auto& c : plan.at("configurations")) {
    BenchConfig bc;
    bc.model = c.value("model", config.chat.model);
    bc.tool = parse_tool(c.at("tool").get<std::string>());
    bc.level = parse_level(c.value("level", "conceptual"));
    bp.configs.push_back(bc);
  }

  std::shared_ptr<llm::ChatProvider> provider;
  if (config.chat.provider == "mock") {
    provider = plan.contains("mock_script")
                   ? std::make_shared<llm::MockProvider>(
                         llm::MockProvider::load_rules(base / plan.at("mock_script").get<std::string>()))
                   : std::make_shared<llm::MockProvider>(mock_bench_rules(qa));
  }
  auto rt = make_runtime(config, provider);
  std::unique_ptr<llm::Gateway> judge_gateway;
  if (config.judge.provider != "mock" &&
      (config.judge.provider != config.chat.provider || config.judge.base_url != config.chat.base_url)) {
    judge_gateway = std::make_unique<llm::Gateway>(llm::make_provider(config.judge), rt.gateway->costs(),
                                                   config.judge.parallelism);
  }

  BenchmarkEnvironment env;
  env.gateway = rt.gateway.get();
  env.judge_gateway = judge_gateway ? judge_gateway.get() : rt.gateway.get();
  env.embedder = rt.embedder.get();
  env.graphs = bench_graphs(plan, base, bp.configs);

  std::filesystem::create_directories(out_dir);
  std::ofstream records_file(std::filesystem::path(out_dir) / "records.jsonl");
  std::size_t done = 0;
  const auto total = bp.configs.size() * qa.size() * bp.repetitions;
  env.on_record = [&](const EvalRecord& r) {
    records_file << to_json(r).dump() << "\n" << std::flush;
    out << fmt::format("[{}/{}] {} {} r{}: {}\n", ++done, total, r.config.label(), r.qa_id, r.repetition,
                       r.failed ? "failed: " + first_line(r.error) : fmt::format("{:.2f}", r.accuracy))
        << std::flush;
  };
  auto records = run_benchmark(bp, qa, env);
  auto rows = aggregate(records);
  auto report = render_report(rows);
  write_file(std::filesystem::path(out_dir) / "report.md", report);
  for (const auto& row : rows) out << render_summary_line(row) << "\n";
  return 0;
}

}  // namespace

void request_shutdown() {
  std::lock_guard lock(g_serve_mu);
  g_shutdown_requested = true;
  if (g_serving) g_serving->stop();
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cin, std::cout, std::cerr);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::istringstream empty;
  return dispatch(args, empty, out, err);
}

int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph retrieval and agent tooling for P&ID knowledge graphs", "pidgraph"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Gateway configuration file (default: $PIDGRAPH_CONFIG or offline mock)");

  std::function<int()> action;

  auto* ingest = app.add_subcommand("ingest", "Condense a GraphML flowsheet to a more abstract level");
  std::string ingest_level, ingest_in, ingest_out, rules_path;
  ingest->add_option("--level", ingest_level, "Target level: process or conceptual")
      ->required()
      ->check(CLI::IsMember({"process", "conceptual"}));
  ingest->add_option("--rules", rules_path, "Condensation rule set (JSON)")->check(CLI::ExistingFile);
  ingest->add_option("input", ingest_in, "Input GraphML")->required();
  ingest->add_option("output", ingest_out, "Output GraphML")->required();
  ingest->callback([&] {
    action = [&] {
      require_file(ingest_in);
      auto g = load_graphml_file(ingest_in);
      auto rules = rules_path.empty() ? CondensationRuleSet::defaults() : CondensationRuleSet::load(rules_path);
      auto condensed = condense(g, parse_level(ingest_level), rules);
      save_graphml_file(condensed, ingest_out, true);
      out << fmt::format("{}: {} nodes, {} edges -> {}: {} nodes, {} edges\n", to_string(g.level()), g.node_count(),
                         g.edge_count(), ingest_level, condensed.node_count(), condensed.edge_count());
      return 0;
    };
  });

  auto* enrich = app.add_subcommand("enrich", "Generate semantic descriptions and embeddings for every node");
  std::string enrich_in, enrich_out;
  bool skip_existing = false;
  std::size_t enrich_parallelism = 1;
  enrich->add_option("graph", enrich_in, "Input GraphML")->required();
  enrich->add_option("--out", enrich_out, "Output GraphML")->required();
  enrich->add_flag("--skip-existing", skip_existing, "Leave already enriched nodes untouched");
  enrich->add_option("--parallelism", enrich_parallelism, "Concurrent node workers")->check(CLI::Range(1, 64));
  enrich->callback([&] {
    action = [&] {
      require_file(enrich_in);
      auto rt = make_runtime(load_config(config_path));
      auto g = load_graphml_file(enrich_in);
      llm::LlmHandle llm{rt.gateway.get(), rt.config.chat.model, "enrich", rt.config.chat.temperature};
      auto report = enrich_graph(g, llm, *rt.embedder, EnrichmentOptions{skip_existing, enrich_parallelism});
      save_graphml_file(g, enrich_out, true);
      const auto usage = rt.gateway->ledger().usage_for("enrich");
      out << fmt::format("enriched {}, skipped {}, failed {}; {} in / {} out tokens, ${:.4f}\n", report.enriched,
                         report.skipped, report.failures.size(), usage.input_tokens, usage.output_tokens,
                         rt.gateway->ledger().cost_for("enrich"));
      for (const auto& f : report.failures) out << "  " << f.node_id << ": " << first_line(f.message) << "\n";
      return report.ok() ? 0 : 1;
    };
  });

  auto* query = app.add_subcommand("query", "Run a graph query against a GraphML file");
  std::string query_graph, query_text;
  bool query_json = false;
  std::size_t hop_ceiling = cypher::kDefaultHopCeiling;
  query->add_option("graph", query_graph, "GraphML file")->required();
  query->add_option("query", query_text, "Query text")->required();
  query->add_flag("--json", query_json, "Print rows as JSON");
  query->add_option("--hop-ceiling", hop_ceiling, "Upper bound for open variable-length patterns")
      ->check(CLI::Range(1, 64));
  query->callback([&] {
    action = [&] {
      require_file(query_graph);
      auto g = load_graphml_file(query_graph);
      auto table = cypher::run_query(query_text, g, cypher::ExecuteOptions{hop_ceiling});
      out << (query_json ? cypher::to_json(table).dump(2) + "\n" : cypher::render_table(table));
      return 0;
    };
  });

  auto* chat = app.add_subcommand("chat", "Converse with the agent in the terminal");
  std::string chat_graph, chat_session_dir, chat_resume;
  std::vector<std::string> chat_messages, chat_tools;
  std::size_t chat_max_calls = 6;
  chat->add_option("graph", chat_graph, "GraphML file (enriched for vector tools)")->required();
  chat->add_option("-m,--message", chat_messages, "Message to send; repeatable. Reads standard input when absent");
  chat->add_option("--tools", chat_tools, "Tools to offer (default: all)")
      ->check(CLI::IsMember({"context_rag", "vector_rag", "path_rag", "cypher_rag"}));
  chat->add_option("--max-tool-calls", chat_max_calls, "Tool calls per turn")->check(CLI::Range(1, 50));
  chat->add_option("--session-dir", chat_session_dir, "Directory for the session log");
  chat->add_option("--resume", chat_resume, "Session log to continue")->check(CLI::ExistingFile);
  chat->callback([&] {
    action = [&] {
      require_file(chat_graph);
      auto rt = make_runtime(load_config(config_path));
      auto res = GraphResources::build(std::filesystem::path(chat_graph).stem().string(),
                                       std::make_shared<const Graph>(load_graphml_file(chat_graph)));
      Agent agent(*rt.gateway, *rt.embedder, agent_config(rt, chat_max_calls, false, chat_tools));
      std::unique_ptr<AgentSession> session;
      if (!chat_resume.empty()) {
        session = AgentSession::restore(chat_resume, res);
      } else {
        std::filesystem::path log;
        const auto id = fmt::format("chat-{}", std::chrono::system_clock::now().time_since_epoch().count());
        if (!chat_session_dir.empty()) {
          std::filesystem::create_directories(chat_session_dir);
          log = std::filesystem::path(chat_session_dir) / (id + ".jsonl");
        }
        session = std::make_unique<AgentSession>(id, res, log);
      }
      TerminalRenderer render(out);
      bool failed = false;
      auto turn = [&](const std::string& text) {
        if (trim(text).empty()) return;
        auto result = agent.run_turn(*session, text, std::ref(render));
        failed = failed || result.failed;
      };
      if (!chat_messages.empty()) {
        for (const auto& m : chat_messages) turn(m);
      } else {
        std::string line;
        while (out << "> " << std::flush, std::getline(in, line)) {
          if (trim(line) == "/quit") break;
          turn(line);
        }
        out << "\n";
      }
      return failed ? 1 : 0;
    };
  });

  auto* bench = app.add_subcommand("bench", "Run the evaluation benchmark described by a plan file");
  std::string plan_path, bench_out;
  bench
      ->add_option("--config,--plan", plan_path,
                   "Benchmark plan (JSON); its \"gateway\" key names the gateway configuration")
      ->required();
  bench->add_option("--out", bench_out, "Directory for records.jsonl and report.md")->required();
  bench->callback([&] { action = [&] { return run_bench(plan_path, bench_out, config_path, out); }; });

  auto* serve = app.add_subcommand("serve", "Serve sessions and streamed agent events over HTTP");
  std::string serve_graph, serve_id, serve_host = "127.0.0.1", serve_session_dir, serve_static;
  std::vector<std::string> serve_tools;
  int serve_port = 8080;
  std::size_t serve_max_calls = 6;
  serve->add_option("--graph", serve_graph, "GraphML file")->required();
  serve->add_option("--graph-id", serve_id, "Graph id (default: file stem)");
  serve->add_option("--port", serve_port, "TCP port; 0 picks a free one")->check(CLI::Range(0, 65535));
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--session-dir", serve_session_dir, "Directory for session logs");
  serve->add_option("--static-dir", serve_static, "Chat client files served at /")->check(CLI::ExistingDirectory);
  serve->add_option("--tools", serve_tools, "Tools to offer (default: all)")
      ->check(CLI::IsMember({"context_rag", "vector_rag", "path_rag", "cypher_rag"}));
  serve->add_option("--max-tool-calls", serve_max_calls, "Tool calls per turn")->check(CLI::Range(1, 50));
  serve->callback([&] {
    action = [&] {
      require_file(serve_graph);
      auto rt = make_runtime(load_config(config_path));
      ChatServiceOptions opts;
      opts.agent = agent_config(rt, serve_max_calls, false, serve_tools);
      opts.session_dir = serve_session_dir;
      opts.static_dir = serve_static;
      ChatService service(*rt.gateway, *rt.embedder, opts);
      const auto id = serve_id.empty() ? std::filesystem::path(serve_graph).stem().string() : serve_id;
      service.add_graph(id, load_graphml_file(serve_graph));
      {
        std::lock_guard lock(g_serve_mu);
        if (g_shutdown_requested) {
          g_shutdown_requested = false;
          return 0;
        }
        g_serving = &service;
      }
      const bool ok = service.listen(serve_host, serve_port, [&](int port) {
        out << fmt::format("serving graph '{}' on http://{}:{}\n", id, serve_host, port) << std::flush;
      });
      {
        std::lock_guard lock(g_serve_mu);
        g_serving = nullptr;
        g_shutdown_requested = false;
      }
      if (!ok) throw Error(ErrorKind::io, fmt::format("cannot listen on {}:{}", serve_host, serve_port));
      return 0;
    };
  });

  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      ++i;
      continue;
    }
    if (args[i].rfind("-", 0) == 0) break;
    if (!app.get_subcommand_no_throw(args[i])) {
      err << "pidgraph: unknown subcommand '" << args[i] << "'\n" << app.help();
      return 2;
    }
    break;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "pidgraph: " << e.what() << "\n";
    const CLI::App* scope = &app;
    for (const auto* sub : app.get_subcommands()) scope = sub;
    err << scope->help();
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const std::exception& e) {
    err << "pidgraph: " << first_line(e.what()) << "\n";
    return 1;
  }
}

}  // namespace pidgraph
