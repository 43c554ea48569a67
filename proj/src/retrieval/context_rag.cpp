// SPDX-License-Identifier: Apache-2.0
#include <map>

#include "pidgraph/errors.hpp"
#include "pidgraph/retrieval.hpp"
#include "pidgraph/text.hpp"
#include "pidgraph/xml.hpp"

namespace pidgraph {

namespace {

constexpr std::string_view kNoisePatterns[] = {"uri", "*URI", "*Uri", "position_*", "dexpiId", "id", "*Id",
                                               "*ID", "fontSize", "shape", "connectorReference"};

bool is_noise_value(const PropertyValue& v) {
  auto uri_like = [](const PropertyValue& x) {
    return x.is_text() && (starts_with(x.as_text(), "http://") || starts_with(x.as_text(), "https://") ||
                           starts_with(x.as_text(), "urn:"));
  };
  if (uri_like(v)) return true;
  if (v.is_list()) {
    for (const auto& item : v.as_list()) {
      if (uri_like(item)) return true;
    }
  }
  return false;
}

std::string type_name(const PropertyValue& v) {
  switch (v.type()) {
    case PropertyType::number: return "double";
    case PropertyType::integer: return "long";
    case PropertyType::boolean: return "boolean";
    default: return "string";
  }
}

}  // namespace

bool is_noise_property(std::string_view name) {
  for (auto pattern : kNoisePatterns) {
    if (glob_match(pattern, name)) return true;
  }
  return false;
}

std::string render_context(const Graph& graph, ContextMode mode) {
  const bool full = mode == ContextMode::graph;
  std::map<std::string, std::size_t> local_id;
  for (const auto& n : graph.nodes()) local_id.emplace(n.id, local_id.size() + 1);

  // (name, domain) -> type, first occurrence wins
  std::map<std::pair<std::string, std::string>, std::string> keys;
  if (full) {
    for (const auto& n : graph.nodes()) {
      for (const auto& [name, value] : n.properties) {
        if (!is_noise_property(name) && !is_noise_value(value)) keys.emplace(std::pair{name, "node"}, type_name(value));
      }
    }
    for (const auto& e : graph.edges()) {
      for (const auto& [name, value] : e.properties) {
        if (!is_noise_property(name) && !is_noise_value(value)) keys.emplace(std::pair{name, "edge"}, type_name(value));
      }
    }
  }

  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<graphml>\n";
  for (const auto& [key, type] : keys) {
    out += "  <key id=\"" + xml::escape_attribute(key.first) + "\" for=\"" + key.second + "\" attr.name=\"" +
           xml::escape_attribute(key.first) + "\" attr.type=\"" + type + "\"/>\n";
  }
  out += "  <graph edgedefault=\"directed\" level=\"" + std::string(to_string(graph.level())) + "\">\n";
  for (const auto& n : graph.nodes()) {
    std::string labels;
    for (const auto& l : n.labels) labels += ":" + l;
    out += "    <node id=\"n" + std::to_string(local_id[n.id]) + "\" labels=\"" + xml::escape_attribute(labels) + "\"";
    std::string body;
    if (full) {
      for (const auto& [name, value] : n.properties) {
        if (is_noise_property(name) || is_noise_value(value)) continue;
        body += "      <data key=\"" + xml::escape_attribute(name) + "\">" + xml::escape_text(value.to_display()) +
                "</data>\n";
      }
    }
    out += body.empty() ? "/>\n" : ">\n" + body + "    </node>\n";
  }
  for (const auto& e : graph.edges()) {
    out += "    <edge source=\"n" + std::to_string(local_id[e.source]) + "\" target=\"n" +
           std::to_string(local_id[e.target]) + "\"";
    if (!full) {
      out += "/>\n";
      continue;
    }
    out += " label=\"" + xml::escape_attribute(e.edge_type) + "\"";
    std::string body;
    for (const auto& [name, value] : e.properties) {
      if (is_noise_property(name) || is_noise_value(value)) continue;
      body += "      <data key=\"" + xml::escape_attribute(name) + "\">" + xml::escape_text(value.to_display()) +
              "</data>\n";
    }
    out += body.empty() ? "/>\n" : ">\n" + body + "    </edge>\n";
  }
  out += "  </graph>\n</graphml>\n";
  return out;
}

ToolResult context_rag(const Graph& graph, ContextMode mode) {
  ToolResult r;
  r.tool = ToolKind::context_rag;
  r.content = render_context(graph, mode);
  r.token_estimate = estimate_tokens(r.content);
  return r;
}

}  // namespace pidgraph
