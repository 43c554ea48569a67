// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "pidgraph/llm/types.hpp"

namespace pidgraph::llm {

struct Price {
  double input_per_million = 0;
  double output_per_million = 0;
};

/// Per-model token prices in currency units per million tokens.
class CostModel {
 public:
  CostModel() = default;
  /// {"note": "...", "currency": "USD", "models": {"id": {"input": x, "output": y}}}
  static CostModel from_json(const nlohmann::json& j);
  static CostModel load(const std::filesystem::path& path);

  void set_price(const std::string& model, Price price);
  bool has(const std::string& model) const { return prices_.count(model) != 0; }
  /// Throws Error(configuration) for unknown models.
  const Price& price(const std::string& model) const;
  double cost(const TokenUsage& usage, const std::string& model) const;
  const std::string& note() const { return note_; }
  const std::string& currency() const { return currency_; }

 private:
  std::map<std::string, Price> prices_;
  std::string note_;
  std::string currency_ = "USD";
};

struct UsageRecord {
  std::uint64_t sequence = 0;
  /// Attribution key, e.g. "<session>/<turn>" or "enrich".
  std::string scope;
  std::string model;
  std::string purpose;
  TokenUsage usage;
  double cost = 0;
  double latency_seconds = 0;
};

/// Append-only, safe under concurrent appends.
class UsageLedger {
 public:
  std::uint64_t append(UsageRecord record);
  std::vector<UsageRecord> records() const;
  std::vector<UsageRecord> records_for(const std::string& scope) const;
  TokenUsage usage_for(const std::string& scope) const;
  double cost_for(const std::string& scope) const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<UsageRecord> records_;
};

/// Provider-agnostic front door: bounds parallelism, checks stream/final
/// equality, prices every call and appends one ledger record per call.
class Gateway {
 public:
  Gateway(std::shared_ptr<ChatProvider> provider, CostModel costs, std::size_t parallelism = 4);

  ChatResponse chat(const ChatRequest& request, const std::string& scope, const StreamCallback& on_chunk = {});

  UsageLedger& ledger() { return ledger_; }
  const UsageLedger& ledger() const { return ledger_; }
  const CostModel& costs() const { return costs_; }
  ChatProvider& provider() { return *provider_; }

 private:
  std::shared_ptr<ChatProvider> provider_;
  CostModel costs_;
  UsageLedger ledger_;
  std::size_t parallelism_;
  std::size_t in_flight_ = 0;
  std::mutex mu_;
  std::condition_variable cv_;
};

/// A gateway bound to one model and one attribution scope.
struct LlmHandle {
  Gateway* gateway = nullptr;
  std::string model;
  std::string scope;
  std::optional<double> temperature;

  ChatResponse chat(ChatRequest request, const StreamCallback& on_chunk = {}) const;
  /// Single user message, no tools.
  std::string ask(const std::string& prompt, const std::string& purpose) const;
};

}  // namespace pidgraph::llm
