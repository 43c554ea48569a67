// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/llm/config.hpp"

#include <cstdlib>

#include "pidgraph/errors.hpp"
#include "pidgraph/graphml.hpp"
#include "pidgraph/llm/http.hpp"
#include "pidgraph/llm/mock.hpp"

namespace pidgraph::llm {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const auto* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorKind::configuration, "unknown key '" + key + "' in " + where);
  }
}

ProviderConfig provider_from(const json& j, const std::filesystem::path& base, const std::string& where) {
  check_keys(j, {"provider", "model", "base_url", "api_key_env", "temperature", "timeout_seconds", "parallelism",
                 "mock_script"},
             where);
  ProviderConfig c;
  c.provider = j.value("provider", c.provider);
  c.model = j.value("model", c.model);
  c.base_url = j.value("base_url", "");
  c.api_key_env = j.value("api_key_env", "");
  if (j.contains("temperature") && !j.at("temperature").is_null()) c.temperature = j.at("temperature").get<double>();
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  c.parallelism = j.value("parallelism", c.parallelism);
  c.mock_script = resolve(base, j.value("mock_script", ""));
  return c;
}

std::string api_key(const std::string& env, const std::string& provider) {
  if (env.empty()) {
    if (provider == "ollama") return {};
    throw Error(ErrorKind::configuration, "provider '" + provider + "' needs api_key_env");
  }
  const char* v = std::getenv(env.c_str());
  if (!v || !*v) {
    if (provider == "ollama") return {};
    throw Error(ErrorKind::configuration, "environment variable " + env + " is not set");
  }
  return v;
}

}  // namespace

GatewayConfig GatewayConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    check_keys(j, {"chat", "judge", "embedder", "prices", "note"}, "gateway config");
    GatewayConfig c;
    if (j.contains("chat")) c.chat = provider_from(j.at("chat"), base_dir, "chat");
    c.judge = j.contains("judge") ? provider_from(j.at("judge"), base_dir, "judge") : c.chat;
    if (j.contains("embedder")) {
      const auto& e = j.at("embedder");
      check_keys(e, {"provider", "model", "base_url", "api_key_env", "dimension", "timeout_seconds"}, "embedder");
      c.embedder.provider = e.value("provider", c.embedder.provider);
      c.embedder.model = e.value("model", c.embedder.model);
      c.embedder.base_url = e.value("base_url", "");
      c.embedder.api_key_env = e.value("api_key_env", "");
      c.embedder.dimension = e.value("dimension", c.embedder.dimension);
      c.embedder.timeout_seconds = e.value("timeout_seconds", c.embedder.timeout_seconds);
    }
    c.prices = j.contains("prices") ? resolve(base_dir, j.at("prices").get<std::string>()) : data_dir() / "config" / "prices.json";
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::configuration, std::string("gateway config: ") + e.what());
  }
}

GatewayConfig GatewayConfig::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::configuration, "config file not found: " + path.string());
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::configuration, "config " + path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

GatewayConfig GatewayConfig::mock_defaults() {
  GatewayConfig c;
  c.chat.mock_script = data_dir() / "mock" / "chat_script.json";
  c.judge = c.chat;
  c.prices = data_dir() / "config" / "prices.json";
  return c;
}

std::shared_ptr<ChatProvider> make_provider(const ProviderConfig& c) {
  if (c.provider == "mock") {
    auto p = std::make_shared<MockProvider>();
    if (!c.mock_script.empty()) {
      for (auto& rule : MockProvider::load_rules(c.mock_script)) p->add(std::move(rule));
    }
    return p;
  }
  const auto dialect = parse_dialect(c.provider);
  HttpEndpoint ep{c.base_url, api_key(c.api_key_env, c.provider), c.timeout_seconds};
  return std::make_shared<HttpChatProvider>(dialect, ep);
}

std::shared_ptr<Embedder> make_embedder(const EmbedderConfig& c) {
  if (c.provider == "mock") return std::make_shared<MockEmbedder>(c.dimension);
  const auto dialect = parse_dialect(c.provider);
  HttpEndpoint ep{c.base_url, api_key(c.api_key_env, c.provider), c.timeout_seconds};
  return std::make_shared<HttpEmbedder>(dialect, ep, c.model, c.dimension);
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("PIDGRAPH_DATA_DIR"); env && *env) return env;
  return PIDGRAPH_DATA_DIR;
}

}  // namespace pidgraph::llm
