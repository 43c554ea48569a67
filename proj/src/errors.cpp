// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/errors.hpp"

namespace pidgraph {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::parse: return "parse";
    case ErrorKind::schema: return "schema";
    case ErrorKind::invalid_transition: return "invalid_transition";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::empty_index: return "empty_index";
    case ErrorKind::query_syntax: return "query_syntax";
    case ErrorKind::query_semantic: return "query_semantic";
    case ErrorKind::hop_ceiling: return "hop_ceiling";
    case ErrorKind::provider: return "provider";
    case ErrorKind::tool: return "tool";
    case ErrorKind::enrichment: return "enrichment";
    case ErrorKind::scoring: return "scoring";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

std::string_view to_string(ProviderErrorClass c) {
  switch (c) {
    case ProviderErrorClass::transport: return "transport";
    case ProviderErrorClass::auth: return "auth";
    case ProviderErrorClass::rate_limit: return "rate_limit";
    case ProviderErrorClass::server: return "server";
    case ProviderErrorClass::bad_request: return "bad_request";
    case ProviderErrorClass::protocol: return "protocol";
    case ProviderErrorClass::script: return "script";
  }
  return "unknown";
}

}  // namespace pidgraph
