// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/property.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "pidgraph/errors.hpp"
#include "pidgraph/text.hpp"

namespace pidgraph {

std::string_view to_string(PropertyType type) {
  switch (type) {
    case PropertyType::text: return "string";
    case PropertyType::number: return "double";
    case PropertyType::integer: return "long";
    case PropertyType::boolean: return "boolean";
    case PropertyType::list: return "list";
  }
  return "unknown";
}

PropertyValue::PropertyValue(double number) : value_(number) {
  if (!std::isfinite(number)) {
    throw Error(ErrorKind::invalid_argument, "property numbers must be finite");
  }
}

PropertyValue::PropertyValue(List list) {
  std::optional<PropertyType> first;
  for (const auto& item : list) {
    if (item.is_list()) {
      throw Error(ErrorKind::invalid_argument, "nested property lists are not supported");
    }
    if (!first) {
      first = item.type();
    } else if (item.type() != *first) {
      throw Error(ErrorKind::invalid_argument, "property lists must be homogeneous");
    }
  }
  value_ = std::move(list);
}

PropertyType PropertyValue::type() const {
  switch (value_.index()) {
    case 0: return PropertyType::text;
    case 1: return PropertyType::number;
    case 2: return PropertyType::integer;
    case 3: return PropertyType::boolean;
    default: return PropertyType::list;
  }
}

std::optional<PropertyType> PropertyValue::element_type() const {
  if (!is_list() || as_list().empty()) return std::nullopt;
  return as_list().front().type();
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  std::string out(buf.data(), ptr);
  // Keep a decimal marker so the literal reads back as a float.
  if (out.find_first_of(".eEn") == std::string::npos) out += ".0";
  return out;
}

std::string PropertyValue::to_literal() const {
  switch (type()) {
    case PropertyType::text: return json_quote(as_text());
    case PropertyType::number: return format_double(as_number());
    case PropertyType::integer: return std::to_string(as_integer());
    case PropertyType::boolean: return as_boolean() ? "true" : "false";
    case PropertyType::list: {
      std::string out = "[";
      bool first = true;
      for (const auto& item : as_list()) {
        if (!first) out += ",";
        first = false;
        out += item.to_literal();
      }
      return out + "]";
    }
  }
  return {};
}

std::string PropertyValue::to_display() const {
  if (is_text()) return as_text();
  return to_literal();
}

void PropertyMap::set(const std::string& name, PropertyValue value) {
  for (auto& [key, existing] : entries_) {
    if (key == name) {
      existing = std::move(value);
      return;
    }
  }
  entries_.emplace_back(name, std::move(value));
}

bool PropertyMap::set_if_absent(const std::string& name, PropertyValue value) {
  if (contains(name)) return false;
  entries_.emplace_back(name, std::move(value));
  return true;
}

bool PropertyMap::erase(std::string_view name) {
  for (auto it = entries_.begin(); it != entries_.end(); ++it) {
    if (it->first == name) {
      entries_.erase(it);
      return true;
    }
  }
  return false;
}

const PropertyValue* PropertyMap::find(std::string_view name) const {
  for (const auto& [key, value] : entries_) {
    if (key == name) return &value;
  }
  return nullptr;
}

std::string PropertyMap::to_json() const {
  std::string out = "{";
  bool first = true;
  for (const auto& [key, value] : entries_) {
    if (!first) out += ", ";
    first = false;
    out += json_quote(key);
    out += ": ";
    out += value.to_literal();
  }
  return out + "}";
}

}  // namespace pidgraph
