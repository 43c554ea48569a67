// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/graphml.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pidgraph/errors.hpp"
#include "pidgraph/text.hpp"
#include "pidgraph/xml.hpp"

namespace pidgraph {

namespace {

constexpr std::string_view kGlobalSemantic = "global_semantic";
constexpr std::string_view kLocalSemantic = "local_semantic";
constexpr std::string_view kGlobalEmbedding = "global_semantic_embedding";
constexpr std::string_view kLocalEmbedding = "local_semantic_embedding";

bool is_reserved_key(std::string_view id) {
  return id == kGlobalSemantic || id == kLocalSemantic || id == kGlobalEmbedding || id == kLocalEmbedding;
}

// Declared GraphML type for a value: scalar type, plus element type for lists.
struct ValueType {
  PropertyType type;
  PropertyType element = PropertyType::text;
  auto operator<=>(const ValueType&) const = default;
};

ValueType value_type(const PropertyValue& v) {
  if (v.is_list()) return {PropertyType::list, v.element_type().value_or(PropertyType::text)};
  return {v.type()};
}

std::string type_suffix(const ValueType& t) {
  if (t.type == PropertyType::list) return "list-" + std::string(to_string(t.element));
  return std::string(to_string(t.type));
}

PropertyType parse_scalar_type(std::string_view name, const xml::Element& where) {
  if (name == "string") return PropertyType::text;
  if (name == "double" || name == "float") return PropertyType::number;
  if (name == "long" || name == "int") return PropertyType::integer;
  if (name == "boolean") return PropertyType::boolean;
  throw PositionedError(ErrorKind::schema, "GraphML: unsupported attr.type '" + std::string(name) + "'",
                        where.line, where.column);
}

struct KeyTable {
  // (name, type) -> key id, per domain, in first-appearance order.
  std::vector<std::tuple<std::string, ValueType, std::string>> node_keys;
  std::vector<std::tuple<std::string, ValueType, std::string>> edge_keys;

  static const std::string& lookup(const std::vector<std::tuple<std::string, ValueType, std::string>>& keys,
                                   const std::string& name, const ValueType& t) {
    for (const auto& [n, ty, id] : keys) {
      if (n == name && ty == t) return id;
    }
    throw Error(ErrorKind::schema, "missing GraphML key for property '" + name + "'");
  }
};

KeyTable build_keys(const Graph& graph) {
  KeyTable table;
  auto collect = [](auto&& items, const std::string& prefix, bool reserve,
                    std::vector<std::tuple<std::string, ValueType, std::string>>& out) {
    std::vector<std::pair<std::string, ValueType>> seen;
    std::map<std::string, std::set<ValueType>> types;
    for (const auto& item : items) {
      for (const auto& [name, value] : item.properties) {
        auto t = value_type(value);
        if (types[name].insert(t).second) seen.emplace_back(name, t);
      }
    }
    for (const auto& [name, t] : seen) {
      const bool ambiguous = types[name].size() > 1 || (reserve && is_reserved_key(name)) ||
                             name.find(':') != std::string::npos;
      std::string id;
      if (ambiguous) {
        id = (prefix.empty() ? std::string("node:") : prefix) + name + ":" + type_suffix(t);
      } else {
        id = prefix + name;
      }
      out.emplace_back(name, t, id);
    }
  };
  collect(graph.nodes(), "", true, table.node_keys);
  collect(graph.edges(), "edge:", false, table.edge_keys);
  return table;
}

std::string key_decl(const std::string& id, std::string_view domain, const std::string& name,
                     const ValueType& t) {
  std::string out = "  <key id=\"" + xml::escape_attribute(id) + "\" for=\"" + std::string(domain) +
                    "\" attr.name=\"" + xml::escape_attribute(name) + "\"";
  if (t.type == PropertyType::list) {
    out += " attr.type=\"string\" attr.list=\"" + std::string(to_string(t.element)) + "\"";
  } else {
    out += " attr.type=\"" + std::string(to_string(t.type)) + "\"";
  }
  return out + "/>\n";
}

std::string data_text(const PropertyValue& v) {
  if (v.is_text()) return v.as_text();
  return v.to_literal();
}

void write_data(std::string& out, std::string_view key, std::string_view text) {
  out += "      <data key=\"";
  out += xml::escape_attribute(key);
  out += "\">";
  out += xml::escape_text(text);
  out += "</data>\n";
}

}  // namespace

std::string format_embedding_text(const Embedding& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out + "]";
}

Embedding parse_embedding_text(std::string_view text) {
  auto body = trim(text);
  if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
    throw Error(ErrorKind::schema, "embedding must be a bracketed list");
  }
  body = body.substr(1, body.size() - 2);
  Embedding values;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t'; };
  auto is_sep = [&](char c) { return c == ',' || is_space(c); };
  auto malformed = [&](std::size_t at) {
    return Error(ErrorKind::schema, "malformed embedding value near offset " + std::to_string(at));
  };
  while (i < body.size()) {
    int commas = 0;
    while (i < body.size() && is_sep(body[i])) {
      if (body[i] == ',') ++commas;
      ++i;
    }
    if (i >= body.size()) {
      if (commas > 0) throw malformed(i);
      break;
    }
    if (commas > 1 || (values.empty() && commas > 0)) throw malformed(i);
    double v = 0;
    const char* begin = body.data() + i;
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, body.data() + body.size(), v);
    if (ec != std::errc{} || !std::isfinite(v)) throw malformed(i);
    values.push_back(v);
    i = static_cast<std::size_t>(ptr - body.data());
    if (i < body.size() && !is_sep(body[i])) throw malformed(i);
  }
  return values;
}

std::string export_graphml(const Graph& graph, bool include_embeddings) {
  const auto keys = build_keys(graph);
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
  out += key_decl(std::string(kGlobalSemantic), "node", std::string(kGlobalSemantic), {PropertyType::text});
  out += key_decl(std::string(kLocalSemantic), "node", std::string(kLocalSemantic), {PropertyType::text});
  out += key_decl(std::string(kGlobalEmbedding), "node", std::string(kGlobalEmbedding), {PropertyType::text});
  out += key_decl(std::string(kLocalEmbedding), "node", std::string(kLocalEmbedding), {PropertyType::text});
  for (const auto& [name, t, id] : keys.node_keys) out += key_decl(id, "node", name, t);
  for (const auto& [name, t, id] : keys.edge_keys) out += key_decl(id, "edge", name, t);

  out += "  <graph id=\"G\" edgedefault=\"directed\" level=\"";
  out += to_string(graph.level());
  out += "\" embedding_dim=\"" + std::to_string(graph.embedding_dim()) + "\">\n";

  for (const auto& n : graph.nodes()) {
    std::string labels;
    for (const auto& l : n.labels) labels += ":" + l;
    out += "    <node id=\"" + xml::escape_attribute(n.id) + "\" labels=\"" + xml::escape_attribute(labels) + "\">\n";
    for (const auto& [name, value] : n.properties) {
      write_data(out, KeyTable::lookup(keys.node_keys, name, value_type(value)), data_text(value));
    }
    if (n.global_semantic) write_data(out, kGlobalSemantic, *n.global_semantic);
    if (n.local_semantic) write_data(out, kLocalSemantic, *n.local_semantic);
    if (include_embeddings) {
      if (n.global_embedding) write_data(out, kGlobalEmbedding, format_embedding_text(*n.global_embedding));
      if (n.local_embedding) write_data(out, kLocalEmbedding, format_embedding_text(*n.local_embedding));
    }
    out += "    </node>\n";
  }
  for (const auto& e : graph.edges()) {
    out += "    <edge id=\"" + xml::escape_attribute(e.id) + "\" source=\"" + xml::escape_attribute(e.source) +
           "\" target=\"" + xml::escape_attribute(e.target) + "\" label=\"" + xml::escape_attribute(e.edge_type) +
           "\" kind=\"" + std::string(to_string(e.kind)) + "\"";
    if (e.properties.empty()) {
      out += "/>\n";
      continue;
    }
    out += ">\n";
    for (const auto& [name, value] : e.properties) {
      write_data(out, KeyTable::lookup(keys.edge_keys, name, value_type(value)), data_text(value));
    }
    out += "    </edge>\n";
  }
  out += "  </graph>\n</graphml>\n";
  return out;
}

namespace {

struct KeyInfo {
  std::string domain;
  std::string name;
  ValueType type;
};

PropertyValue parse_scalar(PropertyType t, std::string_view raw, const xml::Element& where) {
  auto bad = [&](const std::string& what) -> PositionedError {
    return PositionedError(ErrorKind::schema, "GraphML: " + what, where.line, where.column);
  };
  switch (t) {
    case PropertyType::text: return PropertyValue(std::string(raw));
    case PropertyType::number: {
      auto s = trim(raw);
      double v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw bad("malformed double '" + std::string(s) + "'");
      }
      return PropertyValue(v);
    }
    case PropertyType::integer: {
      auto s = trim(raw);
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size()) throw bad("malformed long '" + std::string(s) + "'");
      return PropertyValue(v);
    }
    case PropertyType::boolean: {
      auto s = trim(raw);
      if (s == "true") return PropertyValue(true);
      if (s == "false") return PropertyValue(false);
      throw bad("malformed boolean '" + std::string(s) + "'");
    }
    case PropertyType::list: break;
  }
  throw bad("unsupported scalar type");
}

PropertyValue parse_value(const ValueType& t, const std::string& raw, const xml::Element& where) {
  if (t.type != PropertyType::list) return parse_scalar(t.type, raw, where);
  nlohmann::json arr = nlohmann::json::parse(raw, nullptr, false);
  if (arr.is_discarded() || !arr.is_array()) {
    throw PositionedError(ErrorKind::schema, "GraphML: list value is not a JSON array", where.line, where.column);
  }
  PropertyValue::List items;
  for (const auto& item : arr) {
    switch (t.element) {
      case PropertyType::text:
        if (!item.is_string()) break;
        items.emplace_back(item.get<std::string>());
        continue;
      case PropertyType::number:
        if (!item.is_number()) break;
        items.emplace_back(item.get<double>());
        continue;
      case PropertyType::integer:
        if (!item.is_number_integer()) break;
        items.emplace_back(item.get<std::int64_t>());
        continue;
      case PropertyType::boolean:
        if (!item.is_boolean()) break;
        items.emplace_back(item.get<bool>());
        continue;
      case PropertyType::list: break;
    }
    throw PositionedError(ErrorKind::schema, "GraphML: list element does not match attr.list", where.line,
                          where.column);
  }
  return PropertyValue(std::move(items));
}

std::vector<std::string> parse_labels(std::string_view text) {
  std::vector<std::string> labels;
  for (auto& part : split(text, ':')) {
    auto t = trim(part);
    if (!t.empty()) labels.emplace_back(t);
  }
  return labels;
}

}  // namespace

Graph import_graphml(std::string_view document) {
  const auto root = xml::parse(document);
  if (root.local_name() != "graphml") {
    throw PositionedError(ErrorKind::schema, "GraphML: root element must be <graphml>", root.line, root.column);
  }
  std::map<std::string, KeyInfo> keys;
  const xml::Element* graph_el = nullptr;
  for (const auto& child : root.children) {
    if (child.local_name() == "key") {
      const auto* id = child.attribute("id");
      if (!id) throw PositionedError(ErrorKind::schema, "GraphML: <key> without id", child.line, child.column);
      KeyInfo info;
      const auto* domain = child.attribute("for");
      info.domain = domain ? *domain : "all";
      const auto* name = child.attribute("attr.name");
      info.name = name ? *name : *id;
      const auto* type = child.attribute("attr.type");
      info.type.type = parse_scalar_type(type ? *type : "string", child);
      if (const auto* list = child.attribute("attr.list")) {
        info.type.element = parse_scalar_type(*list, child);
        info.type.type = PropertyType::list;
      }
      keys[*id] = std::move(info);
    } else if (child.local_name() == "graph" && !graph_el) {
      graph_el = &child;
    }
  }
  if (!graph_el) throw PositionedError(ErrorKind::schema, "GraphML: no <graph> element", root.line, root.column);

  auto level = AbstractionLevel::complete;
  if (const auto* lv = graph_el->attribute("level")) level = parse_level(*lv);
  std::size_t dim = kDefaultEmbeddingDim;
  if (const auto* d = graph_el->attribute("embedding_dim")) {
    auto [ptr, ec] = std::from_chars(d->data(), d->data() + d->size(), dim);
    if (ec != std::errc{} || ptr != d->data() + d->size() || dim == 0) {
      throw PositionedError(ErrorKind::schema, "GraphML: invalid embedding_dim", graph_el->line, graph_el->column);
    }
  }

  Graph graph(level, dim);
  auto find_key = [&](const xml::Element& data, std::string_view domain) -> const std::pair<const std::string, KeyInfo>& {
    const auto* key = data.attribute("key");
    if (!key) throw PositionedError(ErrorKind::schema, "GraphML: <data> without key", data.line, data.column);
    auto it = keys.find(*key);
    if (it == keys.end()) {
      throw PositionedError(ErrorKind::schema, "GraphML: unknown key id '" + *key + "'", data.line, data.column);
    }
    if (it->second.domain != domain && it->second.domain != "all") {
      throw PositionedError(ErrorKind::schema, "GraphML: key '" + *key + "' is not declared for " + std::string(domain),
                            data.line, data.column);
    }
    return *it;
  };

  std::vector<const xml::Element*> edge_elements;
  for (const auto& child : graph_el->children) {
    if (child.local_name() == "edge") {
      edge_elements.push_back(&child);
      continue;
    }
    if (child.local_name() != "node") continue;
    Node node;
    const auto* id = child.attribute("id");
    if (!id) throw PositionedError(ErrorKind::schema, "GraphML: <node> without id", child.line, child.column);
    node.id = *id;
    const auto* label_attr = child.attribute("labels");
    if (label_attr) node.labels = parse_labels(*label_attr);
    for (const auto& data : child.children) {
      if (data.local_name() != "data") continue;
      const auto& [key_id, info] = find_key(data, "node");
      try {
        if (key_id == kGlobalSemantic) {
          node.global_semantic = data.text;
        } else if (key_id == kLocalSemantic) {
          node.local_semantic = data.text;
        } else if (key_id == kGlobalEmbedding) {
          node.global_embedding = parse_embedding_text(data.text);
        } else if (key_id == kLocalEmbedding) {
          node.local_embedding = parse_embedding_text(data.text);
        } else if (!label_attr && info.name == "labels") {
          node.labels = parse_labels(data.text);
        } else {
          node.properties.set(info.name, parse_value(info.type, data.text, data));
        }
      } catch (const PositionedError&) {
        throw;
      } catch (const Error& e) {
        throw PositionedError(e.kind(), std::string("GraphML: ") + e.what(), data.line, data.column);
      }
    }
    if (node.labels.empty()) {
      throw PositionedError(ErrorKind::schema, "GraphML: node '" + node.id + "' has no labels", child.line,
                            child.column);
    }
    try {
      graph.add_node(std::move(node));
    } catch (const Error& e) {
      throw PositionedError(e.kind(), std::string("GraphML: ") + e.what(), child.line, child.column);
    }
  }
  for (const auto* el : edge_elements) {
    Edge edge;
    if (const auto* id = el->attribute("id")) edge.id = *id;
    const auto* source = el->attribute("source");
    const auto* target = el->attribute("target");
    if (!source || !target) {
      throw PositionedError(ErrorKind::schema, "GraphML: <edge> needs source and target", el->line, el->column);
    }
    edge.source = *source;
    edge.target = *target;
    if (const auto* label = el->attribute("label")) edge.edge_type = *label;
    for (const auto& data : el->children) {
      if (data.local_name() != "data") continue;
      const auto& [key_id, info] = find_key(data, "edge");
      if (info.name == "label" && edge.edge_type.empty()) {
        edge.edge_type = data.text;
        continue;
      }
      edge.properties.set(info.name, parse_value(info.type, data.text, data));
    }
    if (edge.edge_type.empty()) {
      throw PositionedError(ErrorKind::schema, "GraphML: edge without label", el->line, el->column);
    }
    try {
      if (const auto* kind = el->attribute("kind")) {
        edge.kind = parse_edge_kind(*kind);
      } else {
        edge.kind = is_compositional_type(edge.edge_type) ? EdgeKind::compositional : EdgeKind::reference;
      }
      graph.add_edge(std::move(edge));
    } catch (const PositionedError&) {
      throw;
    } catch (const Error& e) {
      throw PositionedError(e.kind(), std::string("GraphML: ") + e.what(), el->line, el->column);
    }
  }
  graph.validate();
  return graph;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

Graph load_graphml_file(const std::filesystem::path& path) { return import_graphml(read_file(path)); }

void save_graphml_file(const Graph& graph, const std::filesystem::path& path, bool include_embeddings) {
  write_file(path, export_graphml(graph, include_embeddings));
}

namespace {

constexpr std::string_view kSidecarMagic = "PGEMB001";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

void put_f64(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out += static_cast<char>((bits >> (8 * i)) & 0xFF);
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}
  std::uint64_t uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint(8)); }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error(ErrorKind::parse, "embedding sidecar is truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string export_embedding_sidecar(const Graph& graph) {
  std::string out(kSidecarMagic);
  std::uint32_t count = 0;
  for (const auto& n : graph.nodes()) count += (n.global_embedding ? 1 : 0) + (n.local_embedding ? 1 : 0);
  put_u32(out, static_cast<std::uint32_t>(graph.embedding_dim()));
  put_u32(out, count);
  auto entry = [&](const Node& n, std::uint8_t slot, const Embedding& e) {
    put_u32(out, static_cast<std::uint32_t>(n.id.size()));
    out += n.id;
    out += static_cast<char>(slot);
    for (double v : e) put_f64(out, v);
  };
  for (const auto& n : graph.nodes()) {
    if (n.global_embedding) entry(n, 0, *n.global_embedding);
    if (n.local_embedding) entry(n, 1, *n.local_embedding);
  }
  return out;
}

void apply_embedding_sidecar(Graph& graph, std::string_view bytes) {
  ByteReader in(bytes);
  if (in.take(kSidecarMagic.size()) != kSidecarMagic) throw Error(ErrorKind::parse, "not an embedding sidecar");
  const auto dim = in.uint(4);
  if (dim != graph.embedding_dim()) {
    throw Error(ErrorKind::dimension, "sidecar dimension " + std::to_string(dim) + " does not match graph");
  }
  const auto count = in.uint(4);
  std::map<std::string, std::pair<std::optional<Embedding>, std::optional<Embedding>>> staged;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string id(in.take(in.uint(4)));
    const auto slot = in.uint(1);
    if (slot > 1) throw Error(ErrorKind::parse, "invalid sidecar slot");
    Embedding e(dim);
    for (auto& v : e) v = in.f64();
    if (!graph.has_node(id)) throw Error(ErrorKind::not_found, "sidecar references unknown node '" + id + "'");
    auto& [g, l] = staged[id];
    (slot == 0 ? g : l) = std::move(e);
  }
  if (!in.done()) throw Error(ErrorKind::parse, "trailing bytes in embedding sidecar");
  for (auto& [id, pair] : staged) {
    const auto& n = graph.node(id);
    graph.set_embeddings(id, pair.first ? pair.first : n.global_embedding,
                         pair.second ? pair.second : n.local_embedding);
  }
}

}  // namespace pidgraph
