// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace pidgraph {

enum class PropertyType { text, number, integer, boolean, list };

std::string_view to_string(PropertyType type);

/// A node or edge attribute value. Numbers are always finite and lists hold
/// scalars of a single type; the constructors throw otherwise.
class PropertyValue {
 public:
  using List = std::vector<PropertyValue>;

  PropertyValue() : value_(std::string{}) {}
  PropertyValue(std::string text) : value_(std::move(text)) {}
  PropertyValue(const char* text) : value_(std::string(text)) {}
  PropertyValue(double number);
  PropertyValue(std::int64_t integer) : value_(integer) {}
  PropertyValue(int integer) : value_(static_cast<std::int64_t>(integer)) {}
  PropertyValue(bool boolean) : value_(boolean) {}
  PropertyValue(List list);

  PropertyType type() const;
  bool is_text() const { return std::holds_alternative<std::string>(value_); }
  bool is_number() const { return std::holds_alternative<double>(value_); }
  bool is_integer() const { return std::holds_alternative<std::int64_t>(value_); }
  bool is_boolean() const { return std::holds_alternative<bool>(value_); }
  bool is_list() const { return std::holds_alternative<List>(value_); }
  bool is_numeric() const { return is_number() || is_integer(); }

  const std::string& as_text() const { return std::get<std::string>(value_); }
  double as_number() const { return std::get<double>(value_); }
  std::int64_t as_integer() const { return std::get<std::int64_t>(value_); }
  bool as_boolean() const { return std::get<bool>(value_); }
  const List& as_list() const { return std::get<List>(value_); }
  double numeric_value() const { return is_number() ? as_number() : static_cast<double>(as_integer()); }

  /// Element type of a list; nullopt for empty lists and scalars.
  std::optional<PropertyType> element_type() const;

  /// Canonical literal: strings quoted JSON-style, numbers shortest round-trip.
  std::string to_literal() const;
  /// Plain rendering used in prose contexts (strings unquoted).
  std::string to_display() const;

  friend bool operator==(const PropertyValue& a, const PropertyValue& b) { return a.value_ == b.value_; }

 private:
  std::variant<std::string, double, std::int64_t, bool, List> value_;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Insertion-ordered property map.
class PropertyMap {
 public:
  using Entry = std::pair<std::string, PropertyValue>;

  void set(const std::string& name, PropertyValue value);
  /// Inserts only if absent. Returns true when inserted.
  bool set_if_absent(const std::string& name, PropertyValue value);
  bool erase(std::string_view name);
  const PropertyValue* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// Deterministic JSON object text in insertion order.
  std::string to_json() const;

  friend bool operator==(const PropertyMap& a, const PropertyMap& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<Entry> entries_;
};

}  // namespace pidgraph
