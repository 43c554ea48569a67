// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/llm/gateway.hpp"

#include <chrono>
#include <cmath>

#include "pidgraph/errors.hpp"
#include "pidgraph/graphml.hpp"

namespace pidgraph::llm {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    case Role::tool: return "tool";
  }
  return "user";
}

Role parse_role(std::string_view text) {
  if (text == "system") return Role::system;
  if (text == "user") return Role::user;
  if (text == "assistant") return Role::assistant;
  if (text == "tool") return Role::tool;
  throw Error(ErrorKind::parse, "unknown message role '" + std::string(text) + "'");
}

nlohmann::json to_json(const Message& m) {
  nlohmann::json j{{"role", to_string(m.role)}, {"content", m.content}};
  if (!m.tool_calls.empty()) {
    auto calls = nlohmann::json::array();
    for (const auto& c : m.tool_calls) calls.push_back({{"id", c.id}, {"name", c.name}, {"arguments", c.arguments}});
    j["tool_calls"] = calls;
  }
  if (m.role == Role::tool) {
    j["tool_call_id"] = m.tool_call_id;
    j["tool_name"] = m.tool_name;
  }
  return j;
}

Message message_from_json(const nlohmann::json& j) {
  Message m;
  m.role = parse_role(j.at("role").get<std::string>());
  m.content = j.value("content", "");
  if (j.contains("tool_calls")) {
    for (const auto& c : j.at("tool_calls")) {
      m.tool_calls.push_back(ToolCall{c.at("id"), c.at("name"), c.value("arguments", nlohmann::json::object())});
    }
  }
  m.tool_call_id = j.value("tool_call_id", "");
  m.tool_name = j.value("tool_name", "");
  return m;
}

nlohmann::json to_json(const ToolDescriptor& t) {
  return {{"name", t.name}, {"description", t.description}, {"parameters", t.parameters}};
}

CostModel CostModel::from_json(const nlohmann::json& j) {
  CostModel m;
  if (!j.is_object() || !j.contains("models") || !j.at("models").is_object()) {
    throw Error(ErrorKind::configuration, "price table needs a \"models\" object");
  }
  m.note_ = j.value("note", "");
  m.currency_ = j.value("currency", "USD");
  for (const auto& [model, p] : j.at("models").items()) {
    Price price;
    try {
      price.input_per_million = p.at("input").get<double>();
      price.output_per_million = p.value("output", 0.0);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::configuration, "price entry '" + model + "': " + e.what());
    }
    m.set_price(model, price);
  }
  return m;
}

CostModel CostModel::load(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::configuration, "price table " + path.string() + ": " + e.what());
  }
}

void CostModel::set_price(const std::string& model, Price price) {
  if (!(price.input_per_million >= 0) || !(price.output_per_million >= 0) || !std::isfinite(price.input_per_million) ||
      !std::isfinite(price.output_per_million)) {
    throw Error(ErrorKind::configuration, "prices for '" + model + "' must be finite and non-negative");
  }
  prices_[model] = price;
}

const Price& CostModel::price(const std::string& model) const {
  auto it = prices_.find(model);
  if (it == prices_.end()) throw Error(ErrorKind::configuration, "no price configured for model '" + model + "'");
  return it->second;
}

double CostModel::cost(const TokenUsage& usage, const std::string& model) const {
  const auto& p = price(model);
  return static_cast<double>(usage.input_tokens) * p.input_per_million / 1e6 +
         static_cast<double>(usage.output_tokens) * p.output_per_million / 1e6;
}

std::uint64_t UsageLedger::append(UsageRecord record) {
  std::lock_guard lock(mu_);
  record.sequence = records_.size();
  records_.push_back(std::move(record));
  return records_.back().sequence;
}

std::vector<UsageRecord> UsageLedger::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::vector<UsageRecord> UsageLedger::records_for(const std::string& scope) const {
  std::lock_guard lock(mu_);
  std::vector<UsageRecord> out;
  for (const auto& r : records_) {
    if (r.scope == scope) out.push_back(r);
  }
  return out;
}

TokenUsage UsageLedger::usage_for(const std::string& scope) const {
  TokenUsage total;
  for (const auto& r : records_for(scope)) total += r.usage;
  return total;
}

double UsageLedger::cost_for(const std::string& scope) const {
  double total = 0;
  for (const auto& r : records_for(scope)) total += r.cost;
  return total;
}

std::size_t UsageLedger::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

Gateway::Gateway(std::shared_ptr<ChatProvider> provider, CostModel costs, std::size_t parallelism)
    : provider_(std::move(provider)), costs_(std::move(costs)), parallelism_(parallelism) {
  if (!provider_) throw Error(ErrorKind::configuration, "gateway needs a provider");
  if (parallelism_ == 0) throw Error(ErrorKind::configuration, "gateway parallelism must be positive");
}

ChatResponse Gateway::chat(const ChatRequest& request, const std::string& scope, const StreamCallback& on_chunk) {
  costs_.price(request.model);
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < parallelism_; });
    ++in_flight_;
  }
  struct Release {
    Gateway* g;
    ~Release() {
      {
        std::lock_guard lock(g->mu_);
        --g->in_flight_;
      }
      g->cv_.notify_one();
    }
  } release{this};

  std::string streamed;
  const auto start = std::chrono::steady_clock::now();
  auto response = provider_->chat(request, [&](std::string_view chunk) {
    streamed.append(chunk);
    if (on_chunk) on_chunk(chunk);
  });
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (streamed != response.content) {
    throw ProviderError(ProviderErrorClass::protocol, "streamed content differs from final content");
  }
  UsageRecord record;
  record.scope = scope;
  record.model = request.model;
  record.purpose = request.purpose;
  record.usage = response.usage;
  record.cost = costs_.cost(response.usage, request.model);
  record.latency_seconds = elapsed;
  ledger_.append(std::move(record));
  return response;
}

ChatResponse LlmHandle::chat(ChatRequest request, const StreamCallback& on_chunk) const {
  if (!gateway) throw Error(ErrorKind::configuration, "no LLM gateway configured");
  if (request.model.empty()) request.model = model;
  if (!request.temperature) request.temperature = temperature;
  return gateway->chat(request, scope, on_chunk);
}

std::string LlmHandle::ask(const std::string& prompt, const std::string& purpose) const {
  ChatRequest r;
  r.messages.push_back(Message::user(prompt));
  r.purpose = purpose;
  return chat(std::move(r)).content;
}

}  // namespace pidgraph::llm
