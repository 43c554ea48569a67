// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pidgraph {

enum class ErrorKind {
  not_found,
  conflict,
  invalid_argument,
  parse,
  schema,
  invalid_transition,
  dimension,
  configuration,
  empty_index,
  query_syntax,
  query_semantic,
  hop_ceiling,
  provider,
  tool,
  enrichment,
  scoring,
  io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Text-format errors (XML, GraphML, query text) carry a 1-based position.
class PositionedError : public Error {
 public:
  PositionedError(ErrorKind kind, const std::string& message, std::size_t line,
                  std::size_t column)
      : Error(kind, message + " at line " + std::to_string(line) + ", column " +
                        std::to_string(column)),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class QuerySyntaxError : public PositionedError {
 public:
  QuerySyntaxError(const std::string& message, std::size_t line, std::size_t column,
                   std::vector<std::string> expected)
      : PositionedError(ErrorKind::query_syntax, message, line, column),
        expected_(std::move(expected)) {}

  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::vector<std::string> expected_;
};

enum class ProviderErrorClass { transport, auth, rate_limit, server, bad_request, protocol, script };

std::string_view to_string(ProviderErrorClass c);

class ProviderError : public Error {
 public:
  ProviderError(ProviderErrorClass cls, const std::string& message,
                std::optional<double> retry_after_seconds = std::nullopt)
      : Error(ErrorKind::provider, std::string(to_string(cls)) + ": " + message),
        class_(cls),
        retry_after_(retry_after_seconds) {}

  ProviderErrorClass error_class() const noexcept { return class_; }
  std::optional<double> retry_after() const noexcept { return retry_after_; }

 private:
  ProviderErrorClass class_;
  std::optional<double> retry_after_;
};

}  // namespace pidgraph
