// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pidgraph/errors.hpp"
#include "pidgraph/llm/types.hpp"

namespace pidgraph::llm {

/// All present conditions must hold for a rule to match.
struct MockMatcher {
  std::optional<std::string> purpose;
  /// Substring of the last user message.
  std::optional<std::string> contains;
  /// Substring of any message.
  std::optional<std::string> prompt_contains;
  /// Role of the final message in the request.
  std::optional<Role> last_role;
  std::optional<bool> has_tools;
  /// Name of a tool whose result message is already in the request.
  std::optional<std::string> after_tool;
  /// Name of a tool whose result must not be in the request yet.
  std::optional<std::string> before_tool;
  /// Name of a tool offered in the request.
  std::optional<std::string> offers;

  bool matches(const ChatRequest& request) const;
};

struct MockReply {
  /// "{{last_user}}", "{{last_message}}" and "{{line:PREFIX}}" (rest of the
  /// first last-user line starting with PREFIX) are substituted, also
  /// inside string-valued tool call arguments.
  std::string content;
  std::vector<ToolCall> tool_calls;
  std::optional<TokenUsage> usage;
  std::optional<ProviderErrorClass> error;
  std::string finish_reason;
};

struct MockRule {
  MockMatcher when;
  MockReply reply;
  /// Remaining uses; unset means unlimited.
  std::optional<std::size_t> times;
};

/// Script-driven provider. Rules are tried in order; the first matching
/// rule with uses left answers. Unmatched requests throw
/// ProviderError(script). Content streams in word-sized chunks.
class MockProvider : public ChatProvider {
 public:
  MockProvider() = default;
  explicit MockProvider(std::vector<MockRule> rules) : rules_(std::move(rules)) {}

  /// {"rules": [{"when": {...}, "reply": {...}, "times": n}]}
  static std::vector<MockRule> rules_from_json(const nlohmann::json& j);
  static std::vector<MockRule> load_rules(const std::filesystem::path& path);

  void add(MockRule rule);
  ChatResponse chat(const ChatRequest& request, const StreamCallback& on_chunk) override;
  std::string name() const override { return "mock"; }

  /// One JSON line per call: request and response.
  std::vector<std::string> transcript() const;
  std::size_t calls() const;

 private:
  mutable std::mutex mu_;
  std::vector<MockRule> rules_;
  std::vector<std::string> transcript_;
  std::size_t next_call_id_ = 0;
};

/// Splits text into chunks of one word plus trailing whitespace.
std::vector<std::string> word_chunks(std::string_view text);

/// Token estimate the mock reports: ceil(chars / 4) over the request
/// messages and tool descriptors, and over the reply.
TokenUsage mock_usage(const ChatRequest& request, const ChatResponse& response);

/// Deterministic feature-hashing embedder: lower-cased alphanumeric words
/// hashed (FNV-1a) into signed buckets, L2-normalized. Text without words
/// maps to the first basis vector. Exact vectors can be pinned per text.
class MockEmbedder : public Embedder {
 public:
  explicit MockEmbedder(std::size_t dim = kDefaultEmbeddingDim);

  std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
  std::size_t dimension() const override { return dim_; }

  void set_override(const std::string& text, Embedding vector);
  /// Texts containing `needle` make embed() throw ProviderError(server).
  void fail_on(const std::string& needle);
  std::size_t calls() const { return calls_; }

  Embedding encode(std::string_view text) const;

 private:
  std::size_t dim_;
  std::map<std::string, Embedding> overrides_;
  std::vector<std::string> failures_;
  std::atomic<std::size_t> calls_{0};
  mutable std::mutex mu_;
};

}  // namespace pidgraph::llm
