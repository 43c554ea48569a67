// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/llm/http.hpp"

#include <cmath>
#include <exception>

#include <httplib.h>

#include "pidgraph/text.hpp"

namespace pidgraph::llm {

using nlohmann::json;

std::string_view to_string(Dialect d) {
  switch (d) {
    case Dialect::openai: return "openai";
    case Dialect::anthropic: return "anthropic";
    case Dialect::ollama: return "ollama";
  }
  return "openai";
}

Dialect parse_dialect(std::string_view text) {
  if (text == "openai") return Dialect::openai;
  if (text == "anthropic") return Dialect::anthropic;
  if (text == "ollama") return Dialect::ollama;
  throw Error(ErrorKind::configuration, "unknown provider dialect '" + std::string(text) + "'");
}

std::vector<SseEvent> SseParser::feed(std::string_view bytes) {
  buffer_.append(bytes);
  std::vector<SseEvent> out;
  std::size_t start = 0;
  while (true) {
    const auto nl = buffer_.find('\n', start);
    if (nl == std::string::npos) break;
    std::string_view l(buffer_.data() + start, nl - start);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    line(l, out);
    start = nl + 1;
  }
  buffer_.erase(0, start);
  return out;
}

std::vector<SseEvent> SseParser::finish() {
  std::vector<SseEvent> out;
  if (!buffer_.empty()) {
    line(buffer_, out);
    buffer_.clear();
  }
  line("", out);
  return out;
}

void SseParser::line(std::string_view l, std::vector<SseEvent>& out) {
  if (l.empty()) {
    if (has_data_) out.push_back(SseEvent{event_, data_});
    event_.clear();
    data_.clear();
    has_data_ = false;
    return;
  }
  if (l.front() == ':') return;
  const auto colon = l.find(':');
  std::string_view field = l.substr(0, colon);
  std::string_view value = colon == std::string_view::npos ? std::string_view{} : l.substr(colon + 1);
  if (!value.empty() && value.front() == ' ') value.remove_prefix(1);
  if (field == "event") {
    event_ = std::string(value);
  } else if (field == "data") {
    if (has_data_) data_ += '\n';
    data_.append(value);
    has_data_ = true;
  }
}

std::vector<json> NdjsonParser::feed(std::string_view bytes) {
  buffer_.append(bytes);
  std::vector<json> out;
  std::size_t start = 0;
  while (true) {
    const auto nl = buffer_.find('\n', start);
    if (nl == std::string::npos) break;
    auto l = trim(std::string_view(buffer_.data() + start, nl - start));
    if (!l.empty()) {
      try {
        out.push_back(json::parse(l));
      } catch (const json::exception& e) {
        throw ProviderError(ProviderErrorClass::protocol, std::string("malformed stream line: ") + e.what());
      }
    }
    start = nl + 1;
  }
  buffer_.erase(0, start);
  return out;
}

std::vector<json> NdjsonParser::finish() {
  auto out = feed("\n");
  buffer_.clear();
  return out;
}

namespace {

json openai_messages(const ChatRequest& r) {
  auto msgs = json::array();
  for (const auto& m : r.messages) {
    json j{{"role", to_string(m.role)}};
    if (m.role == Role::tool) {
      j["tool_call_id"] = m.tool_call_id;
      j["content"] = m.content;
    } else if (m.role == Role::assistant && !m.tool_calls.empty()) {
      j["content"] = m.content.empty() ? json(nullptr) : json(m.content);
      auto calls = json::array();
      for (const auto& c : m.tool_calls) {
        calls.push_back({{"id", c.id}, {"type", "function"},
                         {"function", {{"name", c.name}, {"arguments", c.arguments.dump()}}}});
      }
      j["tool_calls"] = calls;
    } else {
      j["content"] = m.content;
    }
    msgs.push_back(std::move(j));
  }
  return msgs;
}

json function_tools(const ChatRequest& r) {
  auto tools = json::array();
  for (const auto& t : r.tools) {
    tools.push_back({{"type", "function"},
                     {"function", {{"name", t.name}, {"description", t.description}, {"parameters", t.parameters}}}});
  }
  return tools;
}

json anthropic_body(const ChatRequest& r, bool stream) {
  json body{{"model", r.model}, {"max_tokens", r.max_output_tokens.value_or(4096)}, {"stream", stream}};
  std::string system;
  auto msgs = json::array();
  for (const auto& m : r.messages) {
    switch (m.role) {
      case Role::system:
        if (!system.empty()) system += "\n\n";
        system += m.content;
        break;
      case Role::user: msgs.push_back({{"role", "user"}, {"content", m.content}}); break;
      case Role::assistant: {
        auto blocks = json::array();
        if (!m.content.empty()) blocks.push_back({{"type", "text"}, {"text", m.content}});
        for (const auto& c : m.tool_calls) {
          blocks.push_back({{"type", "tool_use"}, {"id", c.id}, {"name", c.name}, {"input", c.arguments}});
        }
        msgs.push_back({{"role", "assistant"}, {"content", blocks}});
        break;
      }
      case Role::tool: {
        json block{{"type", "tool_result"}, {"tool_use_id", m.tool_call_id}, {"content", m.content}};
        if (!msgs.empty() && msgs.back()["role"] == "user" && msgs.back()["content"].is_array()) {
          msgs.back()["content"].push_back(block);
        } else {
          msgs.push_back({{"role", "user"}, {"content", json::array({block})}});
        }
        break;
      }
    }
  }
  if (!system.empty()) body["system"] = system;
  body["messages"] = msgs;
  if (r.temperature) body["temperature"] = *r.temperature;
  if (!r.tools.empty()) {
    auto tools = json::array();
    for (const auto& t : r.tools) {
      tools.push_back({{"name", t.name}, {"description", t.description}, {"input_schema", t.parameters}});
    }
    body["tools"] = tools;
  }
  return body;
}

json ollama_body(const ChatRequest& r, bool stream) {
  json body{{"model", r.model}, {"stream", stream}};
  auto msgs = json::array();
  for (const auto& m : r.messages) {
    json j{{"role", to_string(m.role)}, {"content", m.content}};
    if (!m.tool_calls.empty()) {
      auto calls = json::array();
      for (const auto& c : m.tool_calls) calls.push_back({{"function", {{"name", c.name}, {"arguments", c.arguments}}}});
      j["tool_calls"] = calls;
    }
    if (m.role == Role::tool) j["tool_name"] = m.tool_name;
    msgs.push_back(std::move(j));
  }
  body["messages"] = msgs;
  if (!r.tools.empty()) body["tools"] = function_tools(r);
  json options = json::object();
  if (r.temperature) options["temperature"] = *r.temperature;
  if (r.max_output_tokens) options["num_predict"] = *r.max_output_tokens;
  if (!options.empty()) body["options"] = options;
  return body;
}

std::string finish_reason_from_anthropic(const std::string& stop) {
  if (stop == "end_turn" || stop == "stop_sequence") return "stop";
  if (stop == "tool_use") return "tool_calls";
  if (stop == "max_tokens") return "length";
  return stop;
}

}  // namespace

json request_body(Dialect dialect, const ChatRequest& r, bool stream) {
  switch (dialect) {
    case Dialect::openai: {
      json body{{"model", r.model}, {"messages", openai_messages(r)}, {"stream", stream}};
      if (stream) body["stream_options"] = {{"include_usage", true}};
      if (!r.tools.empty()) body["tools"] = function_tools(r);
      if (r.temperature) body["temperature"] = *r.temperature;
      if (r.max_output_tokens) body["max_completion_tokens"] = *r.max_output_tokens;
      return body;
    }
    case Dialect::anthropic: return anthropic_body(r, stream);
    case Dialect::ollama: return ollama_body(r, stream);
  }
  return {};
}

StreamAssembler::StreamAssembler(Dialect dialect, StreamCallback on_chunk)
    : dialect_(dialect), on_chunk_(std::move(on_chunk)) {}

void StreamAssembler::text(const std::string& t) {
  if (t.empty()) return;
  response_.content += t;
  if (on_chunk_) on_chunk_(t);
}

void StreamAssembler::on_sse(const SseEvent& event) {
  if (done_) return;
  if (dialect_ == Dialect::openai && trim(event.data) == "[DONE]") {
    done_ = true;
    return;
  }
  json j;
  try {
    j = json::parse(event.data);
  } catch (const json::exception& e) {
    throw ProviderError(ProviderErrorClass::protocol, std::string("malformed event data: ") + e.what());
  }
  if (j.contains("error")) {
    const auto& err = j.at("error");
    const std::string msg = err.is_object() ? err.value("message", err.dump()) : err.dump();
    const std::string type = err.is_object() ? err.value("type", "") : "";
    if (type == "rate_limit_error") throw ProviderError(ProviderErrorClass::rate_limit, msg);
    if (type == "authentication_error") throw ProviderError(ProviderErrorClass::auth, msg);
    throw ProviderError(ProviderErrorClass::server, msg);
  }
  if (dialect_ == Dialect::openai) {
    openai(j);
  } else {
    anthropic(event.event.empty() ? j.value("type", "") : event.event, j);
  }
}

void StreamAssembler::openai(const json& j) {
  if (j.contains("usage") && j.at("usage").is_object()) {
    const auto& u = j.at("usage");
    response_.usage.input_tokens = u.value("prompt_tokens", 0ULL);
    response_.usage.output_tokens = u.value("completion_tokens", 0ULL);
  }
  if (!j.contains("choices")) return;
  for (const auto& choice : j.at("choices")) {
    if (choice.contains("delta")) {
      const auto& d = choice.at("delta");
      if (d.contains("content") && d.at("content").is_string()) text(d.at("content").get<std::string>());
      if (d.contains("tool_calls")) {
        for (const auto& tc : d.at("tool_calls")) {
          auto& call = calls_[tc.value("index", 0)];
          if (tc.contains("id") && tc.at("id").is_string()) call.id = tc.at("id");
          if (tc.contains("function")) {
            const auto& f = tc.at("function");
            if (f.contains("name") && f.at("name").is_string()) call.name += f.at("name").get<std::string>();
            if (f.contains("arguments") && f.at("arguments").is_string()) {
              call.arguments += f.at("arguments").get<std::string>();
            }
          }
        }
      }
    }
    if (choice.contains("finish_reason") && choice.at("finish_reason").is_string()) {
      response_.finish_reason = choice.at("finish_reason");
    }
  }
}

void StreamAssembler::anthropic(const std::string& type, const json& j) {
  if (type == "message_start") {
    const auto& u = j.at("message").value("usage", json::object());
    response_.usage.input_tokens = u.value("input_tokens", 0ULL);
    response_.usage.output_tokens = u.value("output_tokens", 0ULL);
  } else if (type == "content_block_start") {
    const int index = j.value("index", 0);
    const auto& block = j.at("content_block");
    if (block.value("type", "") == "tool_use") {
      anthropic_tool_block_[index] = true;
      auto& call = calls_[index];
      call.id = block.value("id", "");
      call.name = block.value("name", "");
    } else if (block.value("type", "") == "text") {
      text(block.value("text", ""));
    }
  } else if (type == "content_block_delta") {
    const int index = j.value("index", 0);
    const auto& d = j.at("delta");
    const auto dtype = d.value("type", "");
    if (dtype == "text_delta") {
      text(d.value("text", ""));
    } else if (dtype == "input_json_delta") {
      calls_[index].arguments += d.value("partial_json", "");
    }
  } else if (type == "message_delta") {
    if (j.contains("delta") && j.at("delta").contains("stop_reason") && j.at("delta").at("stop_reason").is_string()) {
      response_.finish_reason = finish_reason_from_anthropic(j.at("delta").at("stop_reason"));
    }
    if (j.contains("usage")) response_.usage.output_tokens = j.at("usage").value("output_tokens", 0ULL);
  } else if (type == "message_stop") {
    done_ = true;
  }
}

void StreamAssembler::on_json_line(const json& j) {
  if (done_) return;
  if (j.contains("error")) {
    throw ProviderError(ProviderErrorClass::server, j.at("error").is_string() ? j.at("error").get<std::string>()
                                                                              : j.at("error").dump());
  }
  if (j.contains("message")) {
    const auto& m = j.at("message");
    if (m.contains("content") && m.at("content").is_string()) text(m.at("content"));
    if (m.contains("tool_calls")) {
      for (const auto& tc : m.at("tool_calls")) {
        const int index = static_cast<int>(calls_.size());
        auto& call = calls_[index];
        call.id = "call_" + std::to_string(index);
        call.name = tc.at("function").at("name");
        call.parsed = tc.at("function").value("arguments", json::object());
      }
    }
  }
  if (j.value("done", false)) {
    response_.finish_reason = j.value("done_reason", "stop");
    response_.usage.input_tokens = j.value("prompt_eval_count", 0ULL);
    response_.usage.output_tokens = j.value("eval_count", 0ULL);
    done_ = true;
  }
}

ChatResponse StreamAssembler::finish() {
  for (auto& [index, call] : calls_) {
    ToolCall tc;
    tc.id = call.id.empty() ? "call_" + std::to_string(index) : call.id;
    tc.name = call.name;
    if (call.parsed) {
      tc.arguments = *call.parsed;
    } else if (trim(call.arguments).empty()) {
      tc.arguments = json::object();
    } else {
      try {
        tc.arguments = json::parse(call.arguments);
      } catch (const json::exception&) {
        throw ProviderError(ProviderErrorClass::protocol, "tool call '" + call.name + "' has malformed arguments");
      }
    }
    if (!tc.arguments.is_object()) {
      throw ProviderError(ProviderErrorClass::protocol, "tool call '" + call.name + "' arguments are not an object");
    }
    response_.tool_calls.push_back(std::move(tc));
  }
  calls_.clear();
  if (response_.finish_reason.empty()) response_.finish_reason = response_.tool_calls.empty() ? "stop" : "tool_calls";
  return response_;
}

ProviderErrorClass classify_status(int status) {
  if (status == 401 || status == 403) return ProviderErrorClass::auth;
  if (status == 429) return ProviderErrorClass::rate_limit;
  if (status >= 500) return ProviderErrorClass::server;
  if (status >= 400) return ProviderErrorClass::bad_request;
  return ProviderErrorClass::protocol;
}

std::optional<double> parse_retry_after(std::string_view value) {
  auto t = trim(value);
  if (t.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(t), &used);
    if (used != t.size() || !std::isfinite(v) || v < 0) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string default_base_url(Dialect dialect) {
  switch (dialect) {
    case Dialect::openai: return "https://api.openai.com";
    case Dialect::anthropic: return "https://api.anthropic.com";
    case Dialect::ollama: return "http://localhost:11434";
  }
  return {};
}

namespace {

struct SplitUrl {
  std::string origin;
  std::string prefix;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error(ErrorKind::configuration, "base URL needs a scheme: '" + url + "'");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

struct HttpOutcome {
  int status = 0;
  std::string error_body;
  std::optional<double> retry_after;
};

// POSTs `body` and feeds successful response bytes to `sink`.
HttpOutcome post(const HttpEndpoint& ep, const std::string& path, const httplib::Headers& headers,
                 const std::string& body, const std::function<void(std::string_view)>& sink) {
  const auto url = split_url(ep.base_url);
  httplib::Client cli(url.origin);
  const auto secs = static_cast<time_t>(ep.timeout_seconds);
  const auto usecs = static_cast<time_t>((ep.timeout_seconds - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);

  HttpOutcome out;
  std::exception_ptr failure;
  httplib::Request req;
  req.method = "POST";
  req.path = url.prefix + path;
  req.headers = headers;
  req.set_header("Content-Type", "application/json");
  req.body = body;
  req.response_handler = [&](const httplib::Response& r) {
    out.status = r.status;
    if (r.has_header("retry-after")) out.retry_after = parse_retry_after(r.get_header_value("retry-after"));
    return true;
  };
  req.content_receiver = [&](const char* data, std::size_t len, std::uint64_t, std::uint64_t) {
    if (out.status >= 300) {
      if (out.error_body.size() < 4096) out.error_body.append(data, len);
      return true;
    }
    try {
      sink(std::string_view(data, len));
    } catch (...) {
      failure = std::current_exception();
      return false;
    }
    return true;
  };
  httplib::Response res;
  httplib::Error err = httplib::Error::Success;
  const bool ok = cli.send(req, res, err);
  if (failure) std::rethrow_exception(failure);
  if (out.status == 0) out.status = res.status;
  if (out.status >= 300 || (out.status == 0 && !ok)) {
    if (out.status == 0) {
      throw ProviderError(ProviderErrorClass::transport, "request to " + url.origin + " failed: " + httplib::to_string(err));
    }
    std::string detail = out.error_body.empty() ? res.body : out.error_body;
    if (detail.size() > 300) detail = detail.substr(0, 300) + "...";
    throw ProviderError(classify_status(out.status), "HTTP " + std::to_string(out.status) + ": " + detail,
                        out.retry_after);
  }
  if (!ok) throw ProviderError(ProviderErrorClass::transport, "stream interrupted: " + httplib::to_string(err));
  return out;
}

httplib::Headers auth_headers(Dialect d, const std::string& key) {
  httplib::Headers h;
  if (d == Dialect::anthropic) {
    h.emplace("x-api-key", key);
    h.emplace("anthropic-version", "2023-06-01");
  } else if (!key.empty()) {
    h.emplace("Authorization", "Bearer " + key);
  }
  return h;
}

}  // namespace

HttpChatProvider::HttpChatProvider(Dialect dialect, HttpEndpoint endpoint)
    : dialect_(dialect), endpoint_(std::move(endpoint)) {
  if (endpoint_.base_url.empty()) endpoint_.base_url = default_base_url(dialect_);
}

ChatResponse HttpChatProvider::chat(const ChatRequest& request, const StreamCallback& on_chunk) {
  const std::string path = dialect_ == Dialect::openai      ? "/v1/chat/completions"
                           : dialect_ == Dialect::anthropic ? "/v1/messages"
                                                            : "/api/chat";
  StreamAssembler assembler(dialect_, on_chunk);
  SseParser sse;
  NdjsonParser nd;
  auto headers = auth_headers(dialect_, endpoint_.api_key);
  post(endpoint_, path, headers, request_body(dialect_, request, true).dump(), [&](std::string_view bytes) {
    if (dialect_ == Dialect::ollama) {
      for (const auto& j : nd.feed(bytes)) assembler.on_json_line(j);
    } else {
      for (const auto& e : sse.feed(bytes)) assembler.on_sse(e);
    }
  });
  if (dialect_ == Dialect::ollama) {
    for (const auto& j : nd.finish()) assembler.on_json_line(j);
  } else {
    for (const auto& e : sse.finish()) assembler.on_sse(e);
  }
  if (!assembler.done()) throw ProviderError(ProviderErrorClass::protocol, "stream ended before completion");
  return assembler.finish();
}

HttpEmbedder::HttpEmbedder(Dialect dialect, HttpEndpoint endpoint, std::string model, std::size_t dim)
    : dialect_(dialect), endpoint_(std::move(endpoint)), model_(std::move(model)), dim_(dim) {
  if (dialect_ == Dialect::anthropic) throw Error(ErrorKind::configuration, "anthropic dialect has no embedding endpoint");
  if (endpoint_.base_url.empty()) endpoint_.base_url = default_base_url(dialect_);
}

std::vector<Embedding> HttpEmbedder::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) return {};
  const bool ollama = dialect_ == Dialect::ollama;
  json body{{"model", model_}, {"input", texts}};
  std::string raw;
  post(endpoint_, ollama ? "/api/embed" : "/v1/embeddings", auth_headers(dialect_, endpoint_.api_key), body.dump(),
       [&](std::string_view bytes) { raw.append(bytes); });
  std::vector<Embedding> out(texts.size());
  try {
    const auto j = json::parse(raw);
    if (ollama) {
      const auto& arr = j.at("embeddings");
      if (arr.size() != texts.size()) throw ProviderError(ProviderErrorClass::protocol, "embedding count mismatch");
      for (std::size_t i = 0; i < arr.size(); ++i) out[i] = arr[i].get<Embedding>();
    } else {
      const auto& arr = j.at("data");
      if (arr.size() != texts.size()) throw ProviderError(ProviderErrorClass::protocol, "embedding count mismatch");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto idx = arr[i].value("index", i);
        if (idx >= out.size()) throw ProviderError(ProviderErrorClass::protocol, "embedding index out of range");
        out[idx] = arr[i].at("embedding").get<Embedding>();
      }
    }
  } catch (const json::exception& e) {
    throw ProviderError(ProviderErrorClass::protocol, std::string("malformed embedding response: ") + e.what());
  }
  for (const auto& v : out) {
    if (v.size() != dim_) {
      throw Error(ErrorKind::dimension, "embedder returned dimension " + std::to_string(v.size()) + ", expected " +
                                            std::to_string(dim_));
    }
  }
  return out;
}

}  // namespace pidgraph::llm
