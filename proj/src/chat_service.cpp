// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/chat_service.hpp"

#include <httplib.h>

#include <chrono>
#include <deque>
#include <random>

#include "pidgraph/condense.hpp"
#include "pidgraph/errors.hpp"
#include "pidgraph/graphml.hpp"
#include "pidgraph/text.hpp"

namespace pidgraph {

using nlohmann::json;

namespace {

std::string new_session_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[24];
  std::snprintf(buf, sizeof buf, "s-%012llx", static_cast<unsigned long long>(rng() & 0xFFFFFFFFFFFFULL));
  return buf;
}

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict: return 409;
    default: return 400;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorKind kind, const std::string& message) {
  send_json(res, status_for(kind), json{{"error", {{"kind", std::string(to_string(kind))}, {"message", message}}}});
}

/// Single-producer frame queue between a turn worker and the HTTP writer.
class FrameChannel {
 public:
  void push(std::string frame, bool last) {
    {
      std::lock_guard lock(mu_);
      frames_.push_back(std::move(frame));
      closed_ = closed_ || last;
    }
    cv_.notify_all();
  }
  /// False once drained and closed.
  bool pop(std::string& out) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !frames_.empty() || closed_; });
    if (frames_.empty()) return false;
    out = std::move(frames_.front());
    frames_.pop_front();
    return true;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> frames_;
  bool closed_ = false;
};

json session_summary(const AgentSession& s, bool busy) {
  return json{{"id", s.id()},
              {"graph_id", s.resources().graph_id},
              {"level", std::string(to_string(s.resources().graph->level()))},
              {"created_at", s.created_at()},
              {"turns", s.turn_count()},
              {"busy", busy}};
}

}  // namespace

ChatService::ChatService(llm::Gateway& gateway, llm::Embedder& embedder, ChatServiceOptions options)
    : gateway_(gateway), embedder_(embedder), options_(std::move(options)), agent_(gateway, embedder, options_.agent) {
  if (!options_.session_dir.empty()) std::filesystem::create_directories(options_.session_dir);
}

ChatService::~ChatService() {
  stop();
  wait_idle();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    workers.swap(workers_);
  }
  for (auto& t : workers) {
    if (t.joinable()) t.join();
  }
}

void ChatService::add_graph(const std::string& graph_id, const Graph& graph, bool derive_levels) {
  std::map<AbstractionLevel, std::shared_ptr<const GraphResources>> levels;
  levels[graph.level()] = GraphResources::build(graph_id, std::make_shared<const Graph>(graph));
  if (derive_levels) {
    const Graph* current = &graph;
    std::shared_ptr<const Graph> keep;
    for (auto level : {AbstractionLevel::process, AbstractionLevel::conceptual}) {
      if (level <= current->level()) continue;
      keep = std::make_shared<const Graph>(condense(*current, level));
      levels[level] = GraphResources::build(graph_id, keep);
      current = keep.get();
    }
  }
  {
    std::lock_guard lock(mu_);
    graphs_[graph_id] = std::move(levels);
  }
  restore_sessions();
}

void ChatService::restore_sessions() {
  if (options_.session_dir.empty()) return;
  for (const auto& entry : std::filesystem::directory_iterator(options_.session_dir)) {
    if (entry.path().extension() != ".jsonl") continue;
    const auto id = entry.path().stem().string();
    std::lock_guard lock(mu_);
    if (sessions_.count(id)) continue;
    json head;
    try {
      auto text = read_file(entry.path());
      head = json::parse(text.substr(0, text.find('\n')));
    } catch (const std::exception&) {
      continue;
    }
    auto g = graphs_.find(head.value("graph_id", ""));
    if (g == graphs_.end()) continue;
    auto lv = g->second.find(parse_level(head.value("level", "conceptual")));
    if (lv == g->second.end()) continue;
    sessions_[id] = SessionSlot{AgentSession::restore(entry.path(), lv->second), g->first, false};
  }
}

json ChatService::create_session(const std::string& graph_id, std::optional<AbstractionLevel> level) {
  std::lock_guard lock(mu_);
  auto g = graphs_.find(graph_id);
  if (g == graphs_.end()) throw Error(ErrorKind::not_found, "unknown graph '" + graph_id + "'");
  auto lv = level ? g->second.find(*level) : std::prev(g->second.end());
  if (lv == g->second.end()) {
    throw Error(ErrorKind::not_found, "graph '" + graph_id + "' has no " + std::string(to_string(*level)) + " level");
  }
  std::string id;
  do {
    id = new_session_id();
  } while (sessions_.count(id));
  std::filesystem::path log;
  if (!options_.session_dir.empty()) log = options_.session_dir / (id + ".jsonl");
  auto session = std::make_unique<AgentSession>(id, lv->second, log);
  auto summary = session_summary(*session, false);
  sessions_[id] = SessionSlot{std::move(session), graph_id, false};
  return summary;
}

json ChatService::list_sessions() const {
  std::lock_guard lock(mu_);
  json out = json::array();
  for (const auto& [id, s] : sessions_) out.push_back(session_summary(*s.session, s.busy));
  return out;
}

ChatService::SessionSlot& ChatService::slot(const std::string& id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorKind::not_found, "unknown session '" + id + "'");
  return it->second;
}

const ChatService::SessionSlot& ChatService::slot(const std::string& id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorKind::not_found, "unknown session '" + id + "'");
  return it->second;
}

json ChatService::history(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  const auto& s = slot(session_id);
  json messages = json::array();
  for (const auto& m : s.session->history()) messages.push_back(llm::to_json(m));
  json turns = json::array();
  for (const auto& t : s.session->turns()) {
    json calls = json::array();
    for (const auto& c : t.tool_calls) calls.push_back(json{{"tool", c.tool}, {"arguments", c.arguments}, {"ok", c.ok}});
    turns.push_back(json{{"turn", t.turn},
                         {"answer", t.answer},
                         {"failed", t.failed},
                         {"error", t.error},
                         {"usage", {{"input_tokens", t.usage.input_tokens}, {"output_tokens", t.usage.output_tokens}}},
                         {"cost", t.cost},
                         {"limit_reached", t.limit_reached},
                         {"tool_calls", calls}});
  }
  auto out = session_summary(*s.session, s.busy);
  out["messages"] = messages;
  out["history"] = turns;
  return out;
}

json ChatService::graph_view(const std::string& graph_id, const std::string& level) const {
  std::lock_guard lock(mu_);
  auto g = graphs_.find(graph_id);
  if (g == graphs_.end()) throw Error(ErrorKind::not_found, "unknown graph '" + graph_id + "'");
  std::shared_ptr<const GraphResources> res;
  if (level.empty()) {
    res = std::prev(g->second.end())->second;
  } else {
    AbstractionLevel lv;
    try {
      lv = parse_level(level);
    } catch (const Error&) {
      throw Error(ErrorKind::not_found, "unknown level '" + level + "'");
    }
    auto it = g->second.find(lv);
    if (it == g->second.end()) throw Error(ErrorKind::not_found, "graph '" + graph_id + "' has no " + level + " level");
    res = it->second;
  }
  std::map<std::string, std::size_t> labels;
  for (const auto& n : res->graph->nodes()) {
    for (const auto& l : n.labels) ++labels[l];
  }
  return json{{"graph_id", graph_id},
              {"level", std::string(to_string(res->graph->level()))},
              {"node_count", res->graph->node_count()},
              {"edge_count", res->graph->edge_count()},
              {"labels", labels},
              {"enriched", !res->global_index.empty()}};
}

json ChatService::list_graphs() const {
  std::lock_guard lock(mu_);
  json out = json::array();
  for (const auto& [id, levels] : graphs_) {
    json lv = json::array();
    for (const auto& [level, res] : levels) lv.push_back(std::string(to_string(level)));
    out.push_back(json{{"graph_id", id}, {"levels", lv}});
  }
  return out;
}

void ChatService::claim(const std::string& id) {
  std::lock_guard lock(mu_);
  auto& s = slot(id);
  if (s.busy) throw Error(ErrorKind::conflict, "session '" + id + "' already has a turn in progress");
  s.busy = true;
  ++running_;
}

void ChatService::release(const std::string& id) {
  {
    std::lock_guard lock(mu_);
    slot(id).busy = false;
    --running_;
  }
  idle_cv_.notify_all();
}

TurnResult ChatService::post_message(const std::string& session_id, const std::string& text, const EventSink& sink) {
  if (trim(text).empty()) throw Error(ErrorKind::invalid_argument, "message content is empty");
  claim(session_id);
  AgentSession* session;
  {
    std::lock_guard lock(mu_);
    session = slot(session_id).session.get();
  }
  try {
    auto result = agent_.run_turn(*session, text, sink);
    release(session_id);
    return result;
  } catch (...) {
    release(session_id);
    throw;
  }
}

void ChatService::start_turn(const std::string& session_id, const std::string& text, EventSink sink) {
  if (trim(text).empty()) throw Error(ErrorKind::invalid_argument, "message content is empty");
  claim(session_id);
  AgentSession* session;
  {
    std::lock_guard lock(mu_);
    session = slot(session_id).session.get();
  }
  std::thread worker([this, session, session_id, text, sink = std::move(sink)] {
    try {
      agent_.run_turn(*session, text, sink);
    } catch (const std::exception& e) {
      AgentEvent err;
      err.type = AgentEvent::Type::error;
      err.text = e.what();
      if (sink) sink(err);
    }
    release(session_id);
  });
  std::lock_guard lock(mu_);
  workers_.push_back(std::move(worker));
}

void ChatService::wait_idle() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [&] { return running_ == 0; });
}

void ChatService::bind(httplib::Server& server) {
  auto guarded = [](auto handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      try {
        handler(req, res);
      } catch (const Error& e) {
        send_error(res, e.kind(), e.what());
      } catch (const json::exception& e) {
        send_error(res, ErrorKind::invalid_argument, std::string("malformed request body: ") + e.what());
      } catch (const std::exception& e) {
        send_json(res, 500, json{{"error", {{"kind", "internal"}, {"message", e.what()}}}});
      }
    };
  };

  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  server.Post("/api/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
                auto body = req.body.empty() ? json::object() : json::parse(req.body);
                if (!body.contains("graph_id") || !body.at("graph_id").is_string()) {
                  throw Error(ErrorKind::invalid_argument, "graph_id is required");
                }
                std::optional<AbstractionLevel> level;
                if (body.contains("level")) {
                  try {
                    level = parse_level(body.at("level").get<std::string>());
                  } catch (const Error& e) {
                    throw Error(ErrorKind::not_found, e.what());
                  }
                }
                send_json(res, 201, create_session(body.at("graph_id").get<std::string>(), level));
              }));

  server.Get("/api/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, list_sessions());
             }));

  server.Get(R"(/api/sessions/([^/]+)/history)", guarded([this](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, history(req.matches[1]));
             }));

  server.Get("/api/graphs", guarded([this](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, list_graphs());
             }));

  server.Get(R"(/api/graphs/([^/]+)/view)", guarded([this](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, graph_view(req.matches[1], req.get_param_value("level")));
             }));

  server.Post(R"(/api/sessions/([^/]+)/messages)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                auto body = json::parse(req.body);
                if (!body.contains("content") || !body.at("content").is_string()) {
                  throw Error(ErrorKind::invalid_argument, "content is required");
                }
                auto channel = std::make_shared<FrameChannel>();
                start_turn(req.matches[1], body.at("content").get<std::string>(), [channel](const AgentEvent& e) {
                  const bool last = e.type == AgentEvent::Type::turn_complete || e.type == AgentEvent::Type::error;
                  channel->push("data: " + to_json(e).dump() + "\n\n", last);
                });
                res.status = 200;
                res.set_header("Cache-Control", "no-cache");
                res.set_chunked_content_provider("text/event-stream", [channel](std::size_t, httplib::DataSink& sink) {
                  std::string frame;
                  if (!channel->pop(frame)) {
                    sink.done();
                    return true;
                  }
                  return sink.write(frame.data(), frame.size());
                });
              }));

  if (!options_.static_dir.empty()) server.set_mount_point("/", options_.static_dir.string());
}

bool ChatService::listen(const std::string& host, int port, const std::function<void(int)>& on_ready) {
  {
    std::lock_guard lock(mu_);
    if (stopping_) return true;
    server_ = std::make_unique<httplib::Server>();
  }
  bind(*server_);
  if (port == 0) {
    bound_port_ = server_->bind_to_any_port(host);
  } else {
    if (!server_->bind_to_port(host, port)) return false;
    bound_port_ = port;
  }
  if (bound_port_ <= 0) return false;
  {
    std::lock_guard lock(mu_);
    if (stopping_) return true;
    serving_ = true;
  }
  if (on_ready) on_ready(bound_port_);
  const bool ok = server_->listen_after_bind();
  std::lock_guard lock(mu_);
  serving_ = false;
  return ok;
}

void ChatService::stop() {
  std::lock_guard lock(mu_);
  stopping_ = true;
  if (!server_ || !serving_) return;
  while (!server_->is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  server_->stop();
}

}  // namespace pidgraph
