// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pidgraph/errors.hpp"
#include "pidgraph/llm/types.hpp"

namespace pidgraph::llm {

/// Wire dialects: OpenAI chat completions (SSE), Anthropic messages (SSE),
/// Ollama chat (newline-delimited JSON).
enum class Dialect { openai, anthropic, ollama };

std::string_view to_string(Dialect d);
Dialect parse_dialect(std::string_view text);

struct SseEvent {
  std::string event;
  std::string data;
};

/// Incremental server-sent-events decoder; tolerates arbitrary chunking.
class SseParser {
 public:
  std::vector<SseEvent> feed(std::string_view bytes);
  /// Flushes a trailing event that lacked its blank line.
  std::vector<SseEvent> finish();

 private:
  void line(std::string_view l, std::vector<SseEvent>& out);
  std::string buffer_;
  std::string event_;
  std::string data_;
  bool has_data_ = false;
};

/// Incremental newline-delimited JSON decoder.
class NdjsonParser {
 public:
  std::vector<nlohmann::json> feed(std::string_view bytes);
  std::vector<nlohmann::json> finish();

 private:
  std::string buffer_;
};

nlohmann::json request_body(Dialect dialect, const ChatRequest& request, bool stream);

/// Folds a dialect's streamed frames into a ChatResponse, forwarding text
/// deltas as they arrive.
class StreamAssembler {
 public:
  StreamAssembler(Dialect dialect, StreamCallback on_chunk);

  void on_sse(const SseEvent& event);
  void on_json_line(const nlohmann::json& line);
  bool done() const { return done_; }
  /// Throws ProviderError(protocol) on malformed tool arguments.
  ChatResponse finish();

 private:
  void openai(const nlohmann::json& j);
  void anthropic(const std::string& type, const nlohmann::json& j);
  void text(const std::string& t);

  struct PartialCall {
    std::string id;
    std::string name;
    std::string arguments;
    std::optional<nlohmann::json> parsed;
  };

  Dialect dialect_;
  StreamCallback on_chunk_;
  ChatResponse response_;
  std::map<int, PartialCall> calls_;
  std::map<int, bool> anthropic_tool_block_;
  bool done_ = false;
};

/// Status code to error class: 401/403 auth, 429 rate limit, 5xx server,
/// other 4xx bad request.
ProviderErrorClass classify_status(int status);
/// Seconds from a Retry-After header; nullopt when absent or a date.
std::optional<double> parse_retry_after(std::string_view value);

struct HttpEndpoint {
  /// e.g. "https://api.openai.com" or "http://localhost:11434/prefix".
  std::string base_url;
  std::string api_key;
  double timeout_seconds = 120;
};

std::string default_base_url(Dialect dialect);

class HttpChatProvider : public ChatProvider {
 public:
  HttpChatProvider(Dialect dialect, HttpEndpoint endpoint);
  ChatResponse chat(const ChatRequest& request, const StreamCallback& on_chunk) override;
  std::string name() const override { return std::string(to_string(dialect_)); }

 private:
  Dialect dialect_;
  HttpEndpoint endpoint_;
};

/// OpenAI-compatible /v1/embeddings (also used by hosted embedding APIs)
/// or Ollama /api/embed.
class HttpEmbedder : public Embedder {
 public:
  HttpEmbedder(Dialect dialect, HttpEndpoint endpoint, std::string model, std::size_t dim);
  std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
  std::size_t dimension() const override { return dim_; }

 private:
  Dialect dialect_;
  HttpEndpoint endpoint_;
  std::string model_;
  std::size_t dim_;
};

}  // namespace pidgraph::llm
