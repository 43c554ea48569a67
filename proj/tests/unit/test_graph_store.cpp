// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "pidgraph/errors.hpp"
#include "pidgraph/graphml.hpp"
#include "random_graph.hpp"

using namespace pidgraph;

namespace {

Node make_node(std::string id, std::vector<std::string> labels) {
  Node n;
  n.id = std::move(id);
  n.labels = std::move(labels);
  return n;
}

Graph star() {
  Graph g;
  g.add_node(make_node("c", {"Tank"}));
  for (const char* leaf : {"l1", "l2", "l3"}) g.add_node(make_node(leaf, {"GlobeValve"}));
  g.add_edge(Edge{"e2", "l2", "c", "send_to", EdgeKind::reference, {}});
  g.add_edge(Edge{"e1", "c", "l1", "send_to", EdgeKind::reference, {}});
  g.add_edge(Edge{"e3", "c", "l3", "has", EdgeKind::compositional, {}});
  g.add_node(make_node("iso", {"Pump"}));
  return g;
}

}  // namespace

TEST_CASE("add_node stores a node and rejects duplicate ids") {
  Graph g;
  CHECK(g.add_node(make_node("n1", {"Tank"})) == "n1");
  CHECK(g.node_count() == 1);
  try {
    g.add_node(make_node("n1", {"Tank"}));
    FAIL("expected conflict");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::conflict);
  }
  CHECK(g.node_count() == 1);
}

TEST_CASE("add_node keeps labels and properties losslessly") {
  Graph g;
  auto n = make_node("n1", {"Tank", "Vessel"});
  n.properties.set("length", 4.0);
  g.add_node(n);
  CHECK(g.node("n1") == n);
  CHECK(g.node("n1").properties.find("length")->as_number() == 4.0);
}

TEST_CASE("programmatic insertions get minted ids") {
  Graph g;
  auto a = g.add_node(make_node("", {"Tank"}));
  auto b = g.add_node(make_node("", {"Tank"}));
  CHECK(a.rfind("gen:", 0) == 0);
  CHECK(a != b);
}

TEST_CASE("nodes need a label and edges need endpoints") {
  Graph g;
  CHECK_THROWS_AS(g.add_node(make_node("x", {})), Error);
  CHECK_THROWS_AS(g.add_node(make_node("x", {"A:B"})), Error);
  g.add_node(make_node("a", {"Tank"}));
  try {
    g.add_edge(Edge{"e", "a", "missing", "send_to", EdgeKind::reference, {}});
    FAIL("expected not_found");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::not_found);
  }
  CHECK(g.edge_count() == 0);
  CHECK_THROWS_AS(g.add_edge(Edge{"e", "a", "a", "has", EdgeKind::reference, {}}), Error);
  CHECK_THROWS_AS(g.add_edge(Edge{"e", "a", "a", "send_to", EdgeKind::compositional, {}}), Error);
}

TEST_CASE("node and edge ids live in separate namespaces") {
  Graph g;
  g.add_node(make_node("x", {"Tank"}));
  g.add_edge(Edge{"x", "x", "x", "send_to", EdgeKind::reference, {}});
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("embedding dimension is enforced") {
  Graph g(AbstractionLevel::complete, 4);
  auto n = make_node("a", {"Tank"});
  n.global_embedding = Embedding{1, 2, 3};
  try {
    g.add_node(n);
    FAIL("expected dimension error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension);
  }
  n.global_embedding = Embedding{1, 2, 3, 4};
  CHECK_NOTHROW(g.add_node(n));
}

TEST_CASE("get_neighbors on a star graph") {
  auto g = star();
  auto all = g.neighbors("c");
  REQUIRE(all.size() == 3);
  // ordered by edge id: e1 (c->l1), e2 (l2->c), e3 (c->l3)
  CHECK(all[0].node->id == "l1");
  CHECK(all[0].direction == Direction::outgoing);
  CHECK(all[1].node->id == "l2");
  CHECK(all[1].direction == Direction::incoming);
  CHECK(all[2].node->id == "l3");
  CHECK(all[2].edge->id == "e3");
  CHECK(g.neighbors("c", {"l1", "l2", "l3"}).empty());
  CHECK(g.neighbors("c", {"l2"}).size() == 2);
  CHECK(g.neighbors("iso").empty());
  CHECK_THROWS_AS(g.neighbors("nope"), Error);
}

TEST_CASE("node_context rendering") {
  Graph g(AbstractionLevel::complete, 3);
  g.add_node(make_node("a", {"Tank"}));
  CHECK(node_context(g, "a") == "(:Tank)");

  auto n = make_node("b", {"Tank", "Vessel"});
  n.properties.set("tagName", "T4750");
  n.properties.set("length", 4.0);
  n.local_semantic = "Receives fluid from upstream valves.";
  n.global_embedding = Embedding{0.123456789, 0.5, 0.25};
  g.add_node(n);
  auto text = node_context(g, "b");
  CHECK(text == "(:Tank:Vessel {tagName: \"T4750\", length: 4.0})\nLocal semantic: Receives fluid from upstream valves.");
  CHECK(text.find("0.123456789") == std::string::npos);
  CHECK(text.find("embedding") == std::string::npos);
  CHECK_THROWS_AS(node_context(g, "zz"), Error);
}

TEST_CASE("schema lists exactly what occurs in the graph") {
  Graph empty;
  CHECK(schema(empty).empty());

  auto g = fixtures::flowsheet();
  auto s = schema(g);
  CHECK(s.node_labels.count("Tank"));
  CHECK(s.node_labels.count("GlobeValve"));
  CHECK(s.edge_types.count("has"));
  CHECK(s.properties_by_label.at("SpringLoadedGlobeSafetyValve").count("setPressure"));

  std::set<std::string> labels, types;
  for (const auto& n : g.nodes()) labels.insert(n.labels.begin(), n.labels.end());
  for (const auto& e : g.edges()) types.insert(e.edge_type);
  CHECK(s.node_labels == labels);
  CHECK(s.edge_types == types);

  g.add_node(make_node("new", {"Agitator"}));
  CHECK(schema(g).node_labels.count("Agitator"));
}

TEST_CASE("GraphML round trip of the small fixture") {
  auto g = fixtures::small_graph();
  auto doc = export_graphml(g, true);
  auto back = import_graphml(doc);
  std::string why;
  CHECK_MESSAGE(equivalent(g, back, &why), why);
  CHECK(export_graphml(back, true) == doc);
}

TEST_CASE("GraphML export without embeddings drops only the vectors") {
  auto g = fixtures::small_graph();
  auto back = import_graphml(export_graphml(g, false));
  CHECK_FALSE(back.node("n1").global_embedding.has_value());
  CHECK(back.node("n1").global_semantic == g.node("n1").global_semantic);
}

TEST_CASE("GraphML parses an embedding written as a bracketed decimal list") {
  std::string values = "[0.016520526,-0.014927468";
  for (int i = 2; i < 1023; ++i) values += "," + std::to_string(i) + "e-5";
  values += ",-0.012176747]";
  std::string doc = R"(<?xml version="1.0" encoding="UTF-8"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <key id="global_semantic" for="node" attr.name="global_semantic" attr.type="string"/>
  <key id="global_semantic_embedding" for="node" attr.name="global_semantic_embedding" attr.type="string"/>
  <key id="tagName" for="node" attr.name="tagName" attr.type="string"/>
  <graph id="G" edgedefault="directed">
    <node id="XMP_0041" labels=":Tank:Vessel">
      <data key="tagName">T4750</data>
      <data key="global_semantic_embedding">)" + values + R"(</data>
    </node>
  </graph>
</graphml>)";
  auto g = import_graphml(doc);
  const auto& e = *g.node("XMP_0041").global_embedding;
  REQUIRE(e.size() == 1024);
  CHECK(e.front() == 0.016520526);
  CHECK(e[1] == -0.014927468);
  CHECK(e.back() == -0.012176747);
}

TEST_CASE("GraphML accepts whitespace-separated embedding entries") {
  auto e = parse_embedding_text("[-3.1762512E-4,-0.006226967,\n-0.02870905 0.5]");
  CHECK(e == Embedding{-3.1762512E-4, -0.006226967, -0.02870905, 0.5});
  CHECK_THROWS_AS(parse_embedding_text("[1,,2]"), Error);
  CHECK_THROWS_AS(parse_embedding_text("[1,nan]"), Error);
}

TEST_CASE("truncated GraphML is a positioned parse error") {
  auto doc = export_graphml(fixtures::small_graph(), true);
  auto cut = doc.substr(0, doc.size() / 2);
  try {
    import_graphml(cut);
    FAIL("expected parse error");
  } catch (const PositionedError& e) {
    CHECK(e.kind() == ErrorKind::parse);
    CHECK(e.line() > 1);
  }
}

TEST_CASE("unknown GraphML key id is a schema error") {
  std::string doc = R"(<graphml><graph id="G" edgedefault="directed">
<node id="a" labels=":Tank"><data key="mystery">1</data></node></graph></graphml>)";
  try {
    import_graphml(doc);
    FAIL("expected schema error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::schema);
  }
}

TEST_CASE("GraphML rejects embeddings of the wrong dimension") {
  Graph g(AbstractionLevel::complete, 3);
  auto n = make_node("a", {"Tank"});
  n.global_embedding = Embedding{1, 2, 3};
  g.add_node(n);
  auto doc = export_graphml(g, true);
  auto pos = doc.find("embedding_dim=\"3\"");
  REQUIRE(pos != std::string::npos);
  doc.replace(pos, 17, "embedding_dim=\"4\"");
  CHECK_THROWS_AS(import_graphml(doc), Error);
}

TEST_CASE("embedding sidecar restores vectors") {
  auto g = fixtures::small_graph(8);
  auto bytes = export_embedding_sidecar(g);
  auto stripped = import_graphml(export_graphml(g, false));
  apply_embedding_sidecar(stripped, bytes);
  std::string why;
  CHECK_MESSAGE(equivalent(g, stripped, &why), why);
  CHECK_THROWS_AS(apply_embedding_sidecar(stripped, bytes.substr(0, 20)), Error);
}

TEST_CASE("flowsheet fixture round trips and the shipped file matches the builder") {
  auto g = fixtures::flowsheet();
  auto doc = export_graphml(g, true);
  auto back = import_graphml(doc);
  CHECK(equivalent(g, back));
  auto shipped = read_file(fixtures::data_dir() / "fixtures" / "flowsheet_complete.graphml");
  const std::string license = "<!-- SPDX-License-Identifier: Apache-2.0 -->\n";
  REQUIRE(shipped.find(license) != std::string::npos);
  CHECK(shipped.substr(0, shipped.find(license)) + shipped.substr(shipped.find(license) + license.size()) == doc);
  CHECK(equivalent(import_graphml(shipped), g));
}

TEST_CASE("GraphML round trip over random graphs") {
  std::mt19937_64 rng(4711);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = fixtures::random_graph(rng);
    CAPTURE(trial);
    const auto doc = export_graphml(g, true);
    auto back = import_graphml(doc);
    std::string why;
    CHECK_MESSAGE(equivalent(g, back, &why), why);
    CHECK(export_graphml(back, true) == doc);
    CHECK(export_graphml(g, true) == doc);
  }
}
