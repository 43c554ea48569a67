// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pidgraph/graph.hpp"

namespace pidgraph {

/// GraphML profile
/// ---------------
/// * `<key>` ids `global_semantic`, `local_semantic`,
///   `global_semantic_embedding`, `local_semantic_embedding` are always
///   declared; every property name gets one more key. A property name used
///   with several value types (or clashing with a reserved id) gets one key
///   per type, with id `node:<name>:<type>`; edge property keys are
///   prefixed `edge:`.
/// * Node labels live in the `labels` attribute as `:A:B`.
/// * Edges carry `label` (edge type) and `kind` (compositional|reference).
/// * Embeddings are bracketed comma-separated decimal lists.
/// * `<graph>` carries `level` and `embedding_dim`.
///
/// Export is byte-deterministic for a given graph.
std::string export_graphml(const Graph& graph, bool include_embeddings);

/// Throws PositionedError(parse) on malformed XML and Error(schema) on
/// profile violations. Never returns a partially built graph.
Graph import_graphml(std::string_view document);

Graph load_graphml_file(const std::filesystem::path& path);
void save_graphml_file(const Graph& graph, const std::filesystem::path& path, bool include_embeddings);

/// Binary sidecar holding embeddings as little-endian 64-bit floats.
/// Layout: "PGEMB001", u32 dim, u32 count, then per entry u32 id length,
/// id bytes, u8 slot (0 global, 1 local), dim doubles.
std::string export_embedding_sidecar(const Graph& graph);
/// Applies sidecar embeddings onto nodes of `graph` (matched by id).
void apply_embedding_sidecar(Graph& graph, std::string_view bytes);

/// Parses "[a,b,...]"; commas and/or whitespace separate values.
Embedding parse_embedding_text(std::string_view text);
std::string format_embedding_text(const Embedding& values);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace pidgraph
