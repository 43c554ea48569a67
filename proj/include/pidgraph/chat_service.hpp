// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "pidgraph/agent.hpp"

namespace httplib {
class Server;
}

namespace pidgraph {

struct ChatServiceOptions {
  AgentConfig agent;
  /// Session logs (<id>.jsonl) are written and restored here when set.
  std::filesystem::path session_dir;
  /// Served at "/" when set (the chat UI build).
  std::filesystem::path static_dir;
};

/// Sessions, streamed agent turns and graph inspection over HTTP.
///
///   POST /api/sessions                    {"graph_id", "level"?} -> 201 {"id", ...}
///   GET  /api/sessions                    -> [{"id", "graph_id", "level", "created_at", "turns", "busy"}]
///   POST /api/sessions/{id}/messages      {"content"} -> text/event-stream, one AgentEvent per data frame
///   GET  /api/sessions/{id}/history       -> {"messages", "turns"}
///   GET  /api/graphs                      -> [{"graph_id", "levels"}]
///   GET  /api/graphs/{id}/view?level=L    -> {"node_count", "edge_count", "labels", "level"}
///
/// Errors are {"error": {"kind", "message"}} with 400, 404 or 409.
class ChatService {
 public:
  ChatService(llm::Gateway& gateway, llm::Embedder& embedder, ChatServiceOptions options);
  ~ChatService();
  ChatService(const ChatService&) = delete;
  ChatService& operator=(const ChatService&) = delete;

  /// Registers one flowsheet at its level and, with `derive_levels`, its
  /// condensations to every more abstract level. Sessions logged for this
  /// graph id in the session directory are restored.
  void add_graph(const std::string& graph_id, const Graph& graph, bool derive_levels = true);

  /// Unknown graph or level -> Error(not_found). Default level is the most
  /// abstract one registered.
  nlohmann::json create_session(const std::string& graph_id, std::optional<AbstractionLevel> level = std::nullopt);
  nlohmann::json list_sessions() const;
  nlohmann::json history(const std::string& session_id) const;
  nlohmann::json graph_view(const std::string& graph_id, const std::string& level) const;
  nlohmann::json list_graphs() const;

  /// Runs a turn on the calling thread. Error(conflict) while another
  /// turn of the session is running, Error(not_found) for unknown ids.
  TurnResult post_message(const std::string& session_id, const std::string& text, const EventSink& sink = {});

  /// Starts a turn on a worker thread; events go to `sink` from that
  /// thread. The turn finishes even if the consumer goes away.
  void start_turn(const std::string& session_id, const std::string& text, EventSink sink);

  /// Blocks until no turn is running.
  void wait_idle();

  void bind(httplib::Server& server);
  /// Binds and serves until stop(). Port 0 picks a free port; `on_ready`
  /// receives the bound port before requests are accepted.
  bool listen(const std::string& host, int port, const std::function<void(int)>& on_ready = {});
  int bound_port() const { return bound_port_; }
  /// Ends listen(); later listen() calls return at once.
  void stop();

 private:
  struct SessionSlot {
    std::unique_ptr<AgentSession> session;
    std::string graph_id;
    bool busy = false;
  };

  SessionSlot& slot(const std::string& id);
  const SessionSlot& slot(const std::string& id) const;
  void claim(const std::string& id);
  void release(const std::string& id);
  void restore_sessions();

  llm::Gateway& gateway_;
  llm::Embedder& embedder_;
  ChatServiceOptions options_;
  Agent agent_;

  mutable std::mutex mu_;
  std::condition_variable idle_cv_;
  std::size_t running_ = 0;
  std::map<std::string, std::map<AbstractionLevel, std::shared_ptr<const GraphResources>>> graphs_;
  std::map<std::string, SessionSlot> sessions_;
  std::vector<std::thread> workers_;

  std::unique_ptr<httplib::Server> server_;
  std::atomic<int> bound_port_{0};
  bool serving_ = false;
  bool stopping_ = false;
};

}  // namespace pidgraph
