// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/llm/mock.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "pidgraph/graphml.hpp"
#include "pidgraph/text.hpp"

namespace pidgraph::llm {

namespace {

const Message* last_user(const ChatRequest& r) {
  for (auto it = r.messages.rbegin(); it != r.messages.rend(); ++it) {
    if (it->role == Role::user) return &*it;
  }
  return nullptr;
}

bool has_tool_result(const ChatRequest& r, const std::string& tool) {
  for (const auto& m : r.messages) {
    if (m.role == Role::tool && m.tool_name == tool) return true;
  }
  return false;
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

/// Replaces each "{{line:PREFIX}}" with the remainder of the first line of
/// `source` that starts with PREFIX (empty when none does).
std::string substitute_lines(std::string text, const std::string& source) {
  static constexpr std::string_view open = "{{line:";
  std::size_t pos = 0;
  while ((pos = text.find(open, pos)) != std::string::npos) {
    auto close = text.find("}}", pos);
    if (close == std::string::npos) break;
    const auto prefix = text.substr(pos + open.size(), close - pos - open.size());
    std::string value;
    for (const auto& line : split(source, '\n')) {
      if (starts_with(line, prefix)) {
        value = trim(line.substr(prefix.size()));
        break;
      }
    }
    text.replace(pos, close + 2 - pos, value);
    pos += value.size();
  }
  return text;
}

std::string substitute(const std::string& text, const Message* user, const std::string& last) {
  auto out = replace_all(text, "{{last_user}}", user ? user->content : "");
  out = replace_all(out, "{{last_message}}", last);
  return substitute_lines(out, user ? user->content : "");
}

ProviderErrorClass parse_error_class(const std::string& s) {
  for (auto c : {ProviderErrorClass::transport, ProviderErrorClass::auth, ProviderErrorClass::rate_limit,
                 ProviderErrorClass::server, ProviderErrorClass::bad_request, ProviderErrorClass::protocol,
                 ProviderErrorClass::script}) {
    if (to_string(c) == s) return c;
  }
  throw Error(ErrorKind::configuration, "unknown provider error class '" + s + "'");
}

std::size_t quarter_ceil(std::size_t chars) { return (chars + 3) / 4; }

}  // namespace

bool MockMatcher::matches(const ChatRequest& r) const {
  if (purpose && r.purpose != *purpose) return false;
  if (contains) {
    const auto* u = last_user(r);
    if (!u || u->content.find(*contains) == std::string::npos) return false;
  }
  if (prompt_contains) {
    bool found = false;
    for (const auto& m : r.messages) found = found || m.content.find(*prompt_contains) != std::string::npos;
    if (!found) return false;
  }
  if (last_role && (r.messages.empty() || r.messages.back().role != *last_role)) return false;
  if (has_tools && r.tools.empty() == *has_tools) return false;
  if (after_tool && !has_tool_result(r, *after_tool)) return false;
  if (before_tool && has_tool_result(r, *before_tool)) return false;
  if (offers && std::none_of(r.tools.begin(), r.tools.end(), [&](const auto& t) { return t.name == *offers; })) {
    return false;
  }
  return true;
}

std::vector<MockRule> MockProvider::rules_from_json(const nlohmann::json& j) {
  std::vector<MockRule> rules;
  try {
    for (const auto& item : j.at("rules")) {
      MockRule rule;
      if (item.contains("when")) {
        const auto& w = item.at("when");
        for (const auto& [key, value] : w.items()) {
          if (key == "purpose") rule.when.purpose = value.get<std::string>();
          else if (key == "contains") rule.when.contains = value.get<std::string>();
          else if (key == "prompt_contains") rule.when.prompt_contains = value.get<std::string>();
          else if (key == "last_role") rule.when.last_role = parse_role(value.get<std::string>());
          else if (key == "has_tools") rule.when.has_tools = value.get<bool>();
          else if (key == "after_tool") rule.when.after_tool = value.get<std::string>();
          else if (key == "before_tool") rule.when.before_tool = value.get<std::string>();
          else if (key == "offers") rule.when.offers = value.get<std::string>();
          else throw Error(ErrorKind::configuration, "unknown mock matcher key '" + key + "'");
        }
      }
      const auto& r = item.at("reply");
      rule.reply.content = r.value("content", "");
      rule.reply.finish_reason = r.value("finish_reason", "");
      if (r.contains("tool_calls")) {
        for (const auto& c : r.at("tool_calls")) {
          rule.reply.tool_calls.push_back(
              ToolCall{c.value("id", ""), c.at("name"), c.value("arguments", nlohmann::json::object())});
        }
      }
      if (r.contains("usage")) {
        rule.reply.usage = TokenUsage{r.at("usage").at("input"), r.at("usage").at("output")};
      }
      if (r.contains("error")) rule.reply.error = parse_error_class(r.at("error"));
      if (item.contains("times")) rule.times = item.at("times").get<std::size_t>();
      rules.push_back(std::move(rule));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::configuration, std::string("mock script: ") + e.what());
  }
  return rules;
}

std::vector<MockRule> MockProvider::load_rules(const std::filesystem::path& path) {
  try {
    return rules_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::configuration, "mock script " + path.string() + ": " + e.what());
  }
}

void MockProvider::add(MockRule rule) {
  std::lock_guard lock(mu_);
  rules_.push_back(std::move(rule));
}

std::vector<std::string> word_chunks(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

TokenUsage mock_usage(const ChatRequest& request, const ChatResponse& response) {
  std::size_t in = 0;
  for (const auto& m : request.messages) {
    in += m.content.size();
    for (const auto& c : m.tool_calls) in += c.name.size() + c.arguments.dump().size();
  }
  for (const auto& t : request.tools) in += to_json(t).dump().size();
  std::size_t out = response.content.size();
  for (const auto& c : response.tool_calls) out += c.name.size() + c.arguments.dump().size();
  return TokenUsage{quarter_ceil(in), quarter_ceil(out)};
}

ChatResponse MockProvider::chat(const ChatRequest& request, const StreamCallback& on_chunk) {
  ChatResponse response;
  std::optional<ProviderErrorClass> error;
  {
    std::lock_guard lock(mu_);
    MockRule* chosen = nullptr;
    for (auto& rule : rules_) {
      if (rule.times && *rule.times == 0) continue;
      if (rule.when.matches(request)) {
        chosen = &rule;
        break;
      }
    }
    nlohmann::json entry{{"purpose", request.purpose}, {"model", request.model}};
    auto msgs = nlohmann::json::array();
    for (const auto& m : request.messages) msgs.push_back(to_json(m));
    entry["messages"] = msgs;
    if (!chosen) {
      entry["error"] = "unmatched";
      transcript_.push_back(entry.dump());
      const auto* u = last_user(request);
      throw ProviderError(ProviderErrorClass::script,
                          "no mock rule matches request (purpose '" + request.purpose + "', last user message '" +
                              (u ? u->content.substr(0, 80) : std::string()) + "')");
    }
    if (chosen->times) --*chosen->times;
    const auto* u = last_user(request);
    const std::string last = request.messages.empty() ? "" : request.messages.back().content;
    response.content = substitute(chosen->reply.content, u, last);
    response.tool_calls = chosen->reply.tool_calls;
    for (auto& c : response.tool_calls) {
      if (c.id.empty()) c.id = "call_" + std::to_string(next_call_id_++);
      for (auto& [key, value] : c.arguments.items()) {
        if (!value.is_string()) continue;
        value = substitute(value.get<std::string>(), u, last);
      }
    }
    error = chosen->reply.error;
    response.finish_reason = chosen->reply.finish_reason.empty()
                                 ? (response.tool_calls.empty() ? "stop" : "tool_calls")
                                 : chosen->reply.finish_reason;
    response.usage = chosen->reply.usage ? *chosen->reply.usage : mock_usage(request, response);
    entry["response"] = {{"content", response.content}};
    if (error) entry["error"] = to_string(*error);
    transcript_.push_back(entry.dump());
  }
  if (error) throw ProviderError(*error, "scripted failure");
  if (on_chunk) {
    for (const auto& chunk : word_chunks(response.content)) on_chunk(chunk);
  }
  return response;
}

std::vector<std::string> MockProvider::transcript() const {
  std::lock_guard lock(mu_);
  return transcript_;
}

std::size_t MockProvider::calls() const {
  std::lock_guard lock(mu_);
  return transcript_.size();
}

MockEmbedder::MockEmbedder(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorKind::configuration, "embedding dimension must be positive");
}

void MockEmbedder::set_override(const std::string& text, Embedding vector) {
  std::lock_guard lock(mu_);
  overrides_[text] = std::move(vector);
}

void MockEmbedder::fail_on(const std::string& needle) {
  std::lock_guard lock(mu_);
  failures_.push_back(needle);
}

Embedding MockEmbedder::encode(std::string_view text) const {
  Embedding v(dim_, 0.0);
  std::string word;
  bool any = false;
  auto flush = [&] {
    if (word.empty()) return;
    const auto h = fnv1a64(word);
    v[h % dim_] += (h >> 63) ? -1.0 : 1.0;
    any = true;
    word.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      flush();
    }
  }
  flush();
  double norm = 0;
  for (double x : v) norm += x * x;
  if (!any || norm == 0) {
    std::fill(v.begin(), v.end(), 0.0);
    v[0] = 1.0;
    return v;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<Embedding> MockEmbedder::embed(const std::vector<std::string>& texts) {
  ++calls_;
  std::vector<Embedding> out;
  out.reserve(texts.size());
  std::lock_guard lock(mu_);
  for (const auto& t : texts) {
    for (const auto& f : failures_) {
      if (t.find(f) != std::string::npos) throw ProviderError(ProviderErrorClass::server, "scripted embedder failure");
    }
    auto it = overrides_.find(t);
    out.push_back(it != overrides_.end() ? it->second : encode(t));
  }
  return out;
}

}  // namespace pidgraph::llm
