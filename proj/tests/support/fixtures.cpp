// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include <cstdio>
#include <stdexcept>

namespace fixtures {

using pidgraph::Edge;
using pidgraph::EdgeKind;
using pidgraph::Graph;
using pidgraph::Node;
using pidgraph::PropertyMap;
using pidgraph::PropertyValue;

namespace {

class Builder {
 public:
  explicit Builder(Graph& g) : g_(g) {}

  std::string node(std::vector<std::string> labels, std::vector<std::pair<std::string, PropertyValue>> props) {
    char id[16];
    std::snprintf(id, sizeof id, "XMP_%04d", ++nodes_);
    Node n;
    n.id = id;
    n.labels = std::move(labels);
    for (auto& [k, v] : props) n.properties.set(k, std::move(v));
    n.properties.set("uri", "http://sandbox.dexpi.org/plant/" + n.id);
    n.properties.set("componentClassURI", "http://sandbox.dexpi.org/rdl/" + n.labels.front());
    n.properties.set("position_x", 10.0 + 7.5 * nodes_);
    n.properties.set("position_y", 200.0 - 3.25 * nodes_);
    n.properties.set("dexpiId", std::string(id));
    return g_.add_node(std::move(n));
  }

  void edge(const std::string& s, const std::string& t, const std::string& type) {
    char id[16];
    std::snprintf(id, sizeof id, "E_%04d", ++edges_);
    g_.add_edge(Edge{id, s, t, type, pidgraph::is_compositional_type(type) ? EdgeKind::compositional : EdgeKind::reference, {}});
  }

  void has(const std::string& parent, const std::string& child) { edge(parent, child, "has"); }

  std::string nozzle(const std::string& owner, const std::string& tag, double dn) {
    auto n = node({"Nozzle", "PipingComponent"}, {{"subTagName", tag}, {"nominalDiameter", "DN" + std::to_string(static_cast<int>(dn))}});
    has(owner, n);
    return n;
  }

  void label(const std::string& owner, const std::string& text) {
    auto l = node({"Label"}, {{"text", text}, {"fontSize", 2.5}});
    has(owner, l);
  }

  /// Segment inside `system` carrying `items` connected by pipes:
  /// from -> pipe -> item1 -> pipe -> ... -> to. Returns the pipes.
  std::vector<std::string> line(const std::string& system, const std::string& from, const std::vector<std::string>& items,
                                const std::string& to, const std::string& line_no, const std::string& fluid) {
    auto seg = node({"PipingNetworkSegment"}, {{"segmentNumber", line_no}, {"fluidCode", fluid}});
    has(system, seg);
    std::vector<std::string> pipes;
    std::string prev = from;
    auto add_pipe = [&](const std::string& next) {
      auto p = node({"Pipe", "PipingComponent"}, {{"nominalDiameter", "DN50"}, {"pipingClassCode", "A1"}});
      has(seg, p);
      edge(prev, p, "send_to");
      if (!next.empty()) edge(p, next, "send_to");
      pipes.push_back(p);
      return p;
    };
    for (const auto& item : items) {
      add_pipe(item);
      has(seg, item);
      prev = item;
    }
    if (!to.empty()) add_pipe(to);
    return pipes;
  }

 private:
  Graph& g_;
  int nodes_ = 0;
  int edges_ = 0;
};

}  // namespace

Graph flowsheet() {
  Graph g(pidgraph::AbstractionLevel::complete);
  Builder b(g);
  using L = std::vector<std::string>;

  auto t4750 = b.node(L{"Tank", "Vessel", "Equipment", "TaggedPlantItem"},
                      {{"tagName", "T4750"}, {"length", 4.0}, {"lengthUnit", "m"}, {"shape", "cylindrical"},
                       {"material", "1.4571"}});
  auto ch1 = b.node(L{"Chamber"}, {{"chamberName", "upper chamber"}, {"designPressure", 6.0}, {"designTemperature", 80.0}});
  auto ch2 = b.node(L{"Chamber"}, {{"chamberName", "lower chamber"}, {"designPressure", 6.0}, {"designTemperature", 80.0}});
  b.has(t4750, ch1);
  b.has(t4750, ch2);
  b.label(t4750, "T4750");
  auto tn1 = b.nozzle(t4750, "N1", 50);
  auto tn2 = b.nozzle(t4750, "N2", 50);
  auto tn3 = b.nozzle(t4750, "N3", 80);
  auto tn4 = b.nozzle(t4750, "N4", 25);

  auto p4711 = b.node(L{"CentrifugalPump", "Pump", "Equipment", "TaggedPlantItem"},
                      {{"tagName", "P4711"}, {"designVolumetricFlowRate", 12.5}, {"flowRateUnit", "m3/h"},
                       {"designHead", 32.0}, {"driveType", "electric motor"}});
  b.label(p4711, "P4711");
  auto p11in = b.nozzle(p4711, "N1", 80);
  auto p11out = b.nozzle(p4711, "N2", 50);
  auto p4712 = b.node(L{"CentrifugalPump", "Pump", "Equipment", "TaggedPlantItem"},
                      {{"tagName", "P4712"}, {"designVolumetricFlowRate", 10.0}, {"flowRateUnit", "m3/h"},
                       {"designHead", 32.0}, {"driveType", "electric motor"}});
  b.label(p4712, "P4712");
  auto p12in = b.nozzle(p4712, "N1", 80);
  auto p12out = b.nozzle(p4712, "N2", 50);

  auto h1007 = b.node(L{"PlateHeatExchanger", "HeatExchanger", "Equipment", "TaggedPlantItem"},
                      {{"tagName", "H1007"}, {"designTemperature", 90.0}, {"coolantDesignTemperature", 25.0},
                       {"heatTransferArea", 14.2}, {"temperatureUnit", "degC"}});
  b.label(h1007, "H1007");
  auto hn1 = b.nozzle(h1007, "N1", 50);
  auto hn2 = b.nozzle(h1007, "N2", 50);
  auto hn3 = b.nozzle(h1007, "N3", 40);
  auto hn4 = b.nozzle(h1007, "N4", 40);

  auto feed1 = b.node(L{"PipeOffPageConnector", "PipingComponent"}, {{"tagName", "OPC-FEED-A"}, {"connectorReference", "from unit 46, stream A"}});
  auto feed2 = b.node(L{"PipeOffPageConnector", "PipingComponent"}, {{"tagName", "OPC-FEED-B"}, {"connectorReference", "from unit 46, stream B"}});
  auto vent = b.node(L{"PipeOffPageConnector", "PipingComponent"}, {{"tagName", "OPC-VENT"}, {"connectorReference", "to vent header"}});
  auto product = b.node(L{"PipeOffPageConnector", "PipingComponent"}, {{"tagName", "OPC-PRODUCT"}, {"connectorReference", "to product storage"}});
  auto cws = b.node(L{"PipeOffPageConnector", "PipingComponent"}, {{"tagName", "CWS"}, {"connectorReference", "cooling water supply"}});
  auto cwr = b.node(L{"PipeOffPageConnector", "PipingComponent"}, {{"tagName", "CWR"}, {"connectorReference", "cooling water return"}});

  auto v01 = b.node(L{"GlobeValve", "OperatedValve", "PipingComponent"}, {{"tagName", "V4750.01"}, {"valveCode", "MNb"}, {"nominalDiameter", "DN50"}, {"nominalPressure", "PN16"}});
  auto v02 = b.node(L{"GlobeValve", "OperatedValve", "PipingComponent"}, {{"tagName", "V4750.02"}, {"valveCode", "MNc"}, {"nominalDiameter", "DN50"}, {"nominalPressure", "PN16"}});
  auto psv = b.node(L{"SpringLoadedGlobeSafetyValve", "SafetyValveOrFitting", "PipingComponent"},
                    {{"tagName", "PSV4750"}, {"setPressure", 6.0}, {"pressureUnit", "bar"}, {"nominalDiameter", "DN25"}});
  auto v03 = b.node(L{"ButterflyValve", "OperatedValve", "PipingComponent"}, {{"tagName", "V4750.03"}, {"nominalDiameter", "DN80"}, {"nominalPressure", "PN16"}});
  auto v11a = b.node(L{"BallValve", "OperatedValve", "PipingComponent"}, {{"tagName", "V4711.01"}, {"nominalDiameter", "DN80"}});
  auto v12a = b.node(L{"BallValve", "OperatedValve", "PipingComponent"}, {{"tagName", "V4712.01"}, {"nominalDiameter", "DN80"}});
  auto v11b = b.node(L{"CheckValve", "PipingComponent"}, {{"tagName", "V4711.02"}, {"nominalDiameter", "DN50"}});
  auto v12b = b.node(L{"CheckValve", "PipingComponent"}, {{"tagName", "V4712.02"}, {"nominalDiameter", "DN50"}});
  auto vprod = b.node(L{"GlobeValve", "OperatedValve", "PipingComponent"}, {{"tagName", "V1007.01"}, {"nominalDiameter", "DN50"}, {"nominalPressure", "PN16"}});
  auto tv = b.node(L{"GlobeValve", "OperatedValve", "PipingComponent"}, {{"tagName", "TV1007"}, {"nominalDiameter", "DN40"}, {"failAction", "fail open"}});
  b.label(psv, "PSV4750");
  b.label(tv, "TV1007");

  auto process = b.node(L{"PipingNetworkSystem"}, {{"lineNumber", "P-4750"}, {"fluidCode", "PL"}});
  auto cooling = b.node(L{"PipingNetworkSystem"}, {{"lineNumber", "CW-1007"}, {"fluidCode", "CW"}});

  b.line(process, feed1, {v01}, tn1, "4750-01", "PL");
  b.line(process, feed2, {v02}, tn2, "4750-02", "PL");
  b.line(process, tn4, {psv}, vent, "4750-03", "PL");
  b.line(process, tn3, {v03}, "", "4750-04", "PL");
  b.line(process, v03, {v11a}, p11in, "4711-01", "PL");
  b.line(process, v03, {v12a}, p12in, "4712-01", "PL");
  b.line(process, p11out, {v11b}, hn1, "4711-02", "PL");
  b.line(process, p12out, {v12b}, hn1, "4712-02", "PL");
  auto out_pipes = b.line(process, hn2, {vprod}, product, "1007-01", "PL");
  b.line(cooling, cws, {}, hn3, "1007-02", "CW");
  b.line(cooling, hn4, {tv}, cwr, "1007-03", "CW");

  auto tic = b.node(L{"ProcessInstrumentationFunction"}, {{"tagName", "TIC1007"}, {"processInstrumentationFunctionCategory", "T"}, {"processInstrumentationFunctions", "IC"}, {"setPoint", 40.0}});
  auto tt = b.node(L{"ProcessSignalGeneratingFunction"}, {{"tagName", "TT1007"}, {"sensorType", "Pt100"}});
  auto ty = b.node(L{"ActuatingFunction"}, {{"tagName", "TY1007"}});
  auto act = b.node(L{"ControlledActuator", "Actuator"}, {{"tagName", "A1007"}, {"actuatorType", "pneumatic diaphragm"}});
  b.has(tic, tt);
  b.has(tic, ty);
  b.edge(out_pipes.front(), tt, "signal");
  b.edge(ty, act, "control");
  b.edge(act, tv, "manipulate");
  b.label(tic, "TIC1007");

  auto ti = b.node(L{"ProcessInstrumentationFunction"}, {{"tagName", "TI4750"}, {"processInstrumentationFunctionCategory", "T"}, {"processInstrumentationFunctions", "I"}});
  auto tt4750 = b.node(L{"ProcessSignalGeneratingFunction"}, {{"tagName", "TT4750.03"}, {"sensorType", "Pt100"}});
  b.has(ti, tt4750);
  b.edge(t4750, tt4750, "signal");

  g.validate();
  return g;
}

std::string id_of(const Graph& g, const std::string& tag) {
  for (const auto& n : g.nodes()) {
    const auto* t = n.properties.find("tagName");
    if (t && t->is_text() && t->as_text() == tag) return n.id;
  }
  throw std::runtime_error("no node tagged " + tag);
}

Graph path_fixture() {
  Graph g(pidgraph::AbstractionLevel::conceptual);
  auto add = [&](const std::string& id, std::vector<std::string> labels, const std::string& tag) {
    Node n;
    n.id = id;
    n.labels = std::move(labels);
    n.properties.set("tagName", tag);
    g.add_node(std::move(n));
  };
  add("he", {"HeatExchanger", "Equipment"}, "HE-1");
  add("tic", {"ProcessInstrumentationFunction"}, "TIC-1");
  add("act", {"ControlledActuator", "Actuator"}, "A-1");
  add("gv", {"GlobeValve", "OperatedValve"}, "GV-1");
  add("opc", {"PipeOffPageConnector"}, "CWR");
  add("pump", {"CentrifugalPump", "Pump", "Equipment"}, "P-1");
  add("tank", {"Tank", "Equipment"}, "T-1");
  auto edge = [&](const std::string& id, const std::string& s, const std::string& t, const std::string& type) {
    g.add_edge(Edge{id, s, t, type, EdgeKind::reference, {}});
  };
  edge("e1", "he", "gv", "send_to");
  edge("e2", "he", "tic", "signal");
  edge("e3", "tic", "act", "control");
  edge("e4", "act", "gv", "manipulate");
  edge("e5", "gv", "opc", "send_to");
  edge("e6", "pump", "he", "send_to");
  edge("e7", "tank", "pump", "send_to");
  return g;
}

Graph small_graph(std::size_t dim) {
  Graph g(pidgraph::AbstractionLevel::complete, dim);
  pidgraph::Embedding e1(dim, 0.0), e2(dim, 0.0);
  e1[0] = 0.016520526;
  e1[dim - 1] = -0.012176747;
  e2[1] = -3.1762512E-4;
  Node tank;
  tank.id = "n1";
  tank.labels = {"Tank", "Vessel", "Equipment"};
  tank.properties.set("tagName", "T4750");
  tank.properties.set("length", 4.0);
  tank.properties.set("chambers", std::int64_t{2});
  tank.properties.set("insulated", true);
  tank.properties.set("materials", PropertyValue::List{PropertyValue("1.4571"), PropertyValue("PTFE")});
  tank.global_semantic = "The component \"T4750\" is a tank <storage> & transfer point.";
  tank.local_semantic = "Receives fluid from globe valves.\nFeeds the butterfly valve.";
  tank.global_embedding = e1;
  tank.local_embedding = e2;
  g.add_node(tank);
  Node valve;
  valve.id = "n2";
  valve.labels = {"GlobeValve"};
  valve.properties.set("tagName", "V4750.01");
  valve.properties.set("setPressure", 6.5);
  g.add_node(valve);
  Node pump;
  pump.id = "n3";
  pump.labels = {"CentrifugalPump", "Pump", "Equipment"};
  pump.properties.set("designVolumetricFlowRate", 12.5);
  pump.properties.set("ratings", PropertyValue::List{PropertyValue(1.5), PropertyValue(2.0)});
  g.add_node(pump);
  Node nozzle;
  nozzle.id = "n4";
  nozzle.labels = {"Nozzle"};
  g.add_node(nozzle);
  Node opc;
  opc.id = "n5";
  opc.labels = {"PipeOffPageConnector"};
  opc.properties.set("tagName", "CWR");
  opc.properties.set("note", "line1\tline2 \"quoted\"");
  g.add_node(opc);
  PropertyMap flow;
  flow.set("flow", std::int64_t{10});
  g.add_edge(Edge{"e1", "n2", "n1", "send_to", EdgeKind::reference, flow});
  g.add_edge(Edge{"e2", "n1", "n4", "has", EdgeKind::compositional, {}});
  g.add_edge(Edge{"e3", "n1", "n3", "CONNECTED_TO", EdgeKind::reference, {}});
  g.add_edge(Edge{"e4", "n3", "n5", "send_to", EdgeKind::reference, {}});
  return g;
}

Graph chain(std::size_t n) {
  Graph g(pidgraph::AbstractionLevel::process);
  for (std::size_t i = 0; i < n; ++i) {
    Node node;
    node.id = "a" + std::to_string(i);
    node.labels = {i % 2 == 0 ? "Pump" : "Tank", "Equipment"};
    node.properties.set("tagName", "X" + std::to_string(i));
    g.add_node(std::move(node));
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    g.add_edge(Edge{"c" + std::to_string(i), "a" + std::to_string(i), "a" + std::to_string(i + 1), "CONNECTED_TO", EdgeKind::reference, {}});
  }
  return g;
}

std::filesystem::path data_dir() { return PIDGRAPH_DATA_DIR; }

}  // namespace fixtures
