// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "pidgraph/llm/gateway.hpp"
#include "pidgraph/llm/types.hpp"

namespace pidgraph::llm {

struct ProviderConfig {
  /// mock | openai | anthropic | ollama
  std::string provider = "mock";
  std::string model = "gpt-5-mini";
  std::string base_url;
  /// Environment variable holding the API key.
  std::string api_key_env;
  std::optional<double> temperature;
  double timeout_seconds = 120;
  std::size_t parallelism = 4;
  /// Rules file for the mock provider.
  std::filesystem::path mock_script;
};

struct EmbedderConfig {
  /// mock | openai | ollama
  std::string provider = "mock";
  std::string model = "voyage-3.5-lite";
  std::string base_url;
  std::string api_key_env;
  std::size_t dimension = 1024;
  double timeout_seconds = 60;
};

/// {"chat": {...}, "judge": {...}, "embedder": {...}, "prices": "prices.json"}
/// Relative paths resolve against the file's directory. "judge" defaults
/// to "chat".
struct GatewayConfig {
  ProviderConfig chat;
  ProviderConfig judge;
  EmbedderConfig embedder;
  std::filesystem::path prices;

  static GatewayConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static GatewayConfig load(const std::filesystem::path& path);
  /// Mock chat running the shipped offline script, mock embedder and the
  /// shipped price table.
  static GatewayConfig mock_defaults();
};

/// Throws Error(configuration) when a required API key is missing.
std::shared_ptr<ChatProvider> make_provider(const ProviderConfig& config);
std::shared_ptr<Embedder> make_embedder(const EmbedderConfig& config);

/// Shipped data directory (price table, rules, QA set, mock scripts).
std::filesystem::path data_dir();

}  // namespace pidgraph::llm
