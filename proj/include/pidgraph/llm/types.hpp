// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pidgraph/graph.hpp"

namespace pidgraph::llm {

enum class Role { system, user, assistant, tool };

std::string_view to_string(Role role);
Role parse_role(std::string_view text);

struct ToolCall {
  std::string id;
  std::string name;
  nlohmann::json arguments = nlohmann::json::object();
  friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

struct Message {
  Role role = Role::user;
  std::string content;
  /// Assistant messages that request tools.
  std::vector<ToolCall> tool_calls;
  /// Tool messages: the call being answered.
  std::string tool_call_id;
  std::string tool_name;

  static Message system(std::string text) { return {Role::system, std::move(text), {}, {}, {}}; }
  static Message user(std::string text) { return {Role::user, std::move(text), {}, {}, {}}; }
  static Message assistant(std::string text, std::vector<ToolCall> calls = {}) {
    return {Role::assistant, std::move(text), std::move(calls), {}, {}};
  }
  static Message tool(std::string call_id, std::string name, std::string text) {
    return {Role::tool, std::move(text), {}, std::move(call_id), std::move(name)};
  }
  friend bool operator==(const Message&, const Message&) = default;
};

nlohmann::json to_json(const Message& m);
Message message_from_json(const nlohmann::json& j);

struct ToolDescriptor {
  std::string name;
  std::string description;
  /// JSON schema of the arguments object.
  nlohmann::json parameters = nlohmann::json::object();
};

nlohmann::json to_json(const ToolDescriptor& t);

struct TokenUsage {
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;

  TokenUsage& operator+=(const TokenUsage& o) {
    input_tokens += o.input_tokens;
    output_tokens += o.output_tokens;
    return *this;
  }
  friend TokenUsage operator+(TokenUsage a, const TokenUsage& b) { return a += b; }
  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  std::vector<ToolDescriptor> tools;
  std::optional<double> temperature;
  std::optional<std::uint32_t> max_output_tokens;
  /// Free-form tag recorded in the usage ledger ("agent", "judge", ...).
  std::string purpose;
};

struct ChatResponse {
  std::string content;
  std::vector<ToolCall> tool_calls;
  TokenUsage usage;
  std::string finish_reason;
};

/// Receives content deltas as they arrive.
using StreamCallback = std::function<void(std::string_view chunk)>;

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  /// Streams content deltas to `on_chunk` (when set); their concatenation
  /// equals the returned content. Throws ProviderError.
  virtual ChatResponse chat(const ChatRequest& request, const StreamCallback& on_chunk) = 0;
  virtual std::string name() const = 0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  /// One vector per input, each of dimension(). Throws ProviderError.
  virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) = 0;
  virtual std::size_t dimension() const = 0;
};

}  // namespace pidgraph::llm
