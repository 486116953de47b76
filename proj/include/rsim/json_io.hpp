#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rsim/graph.hpp"
#include "rsim/protocol.hpp"
#include "rsim/verifier.hpp"

namespace rsim {

using Json = nlohmann::ordered_json;

// --- graph: {"n": ..., "edges": [[u,v], ...]} -------------------------------

inline Json graph_to_json(const Graph& g) {
  Json j;
  j["n"] = g.n();
  auto edges = Json::array();
  for (auto [u, v] : g.edges()) edges.push_back(Json::array({u, v}));
  j["edges"] = std::move(edges);
  return j;
}

inline Graph graph_from_json(const Json& j) {
  int const n = j.at("n").get<int>();
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw std::invalid_argument("graph json: bad edge entry");
    edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
  }
  return Graph::from_edges(n, edges);
}

/// Loads a graph from a file: JSON when the content starts with '{',
/// otherwise the edge-list text format.
inline Graph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open graph file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{')
    return graph_from_json(Json::parse(text));
  return parse_edge_list(text);
}

// --- configuration ----------------------------------------------------------

inline Json node_state_to_json(const NodeState& s, const ProtocolParams& p) {
  Json j;
  j["d"] = s.d();
  j["err"] = s.err();
  auto clocks = Json::array();
  for (int i = 1; i <= p.clock_count(); ++i) {
    Json c;
    c["c"] = s.c(i);
    c["b"] = s.b(i) == Arrow::up ? "up" : "down";
    clocks.push_back(std::move(c));
  }
  j["clocks"] = std::move(clocks);
  return j;
}

inline Json config_to_json(const Configuration& cfg) {
  Json j;
  j["k"] = cfg.k();
  auto nodes = Json::array();
  for (const auto& s : cfg.states) nodes.push_back(node_state_to_json(s, cfg.params));
  j["nodes"] = std::move(nodes);
  return j;
}

inline Configuration config_from_json(const Json& j) {
  ProtocolParams params(j.at("k").get<int>());
  const auto& nodes = j.at("nodes");
  Configuration cfg(params, static_cast<int>(nodes.size()));
  for (size_t u = 0; u < nodes.size(); ++u) {
    const auto& nj = nodes[u];
    NodeState s;
    int const d = nj.at("d").get<int>();
    if (d < 0 || d > params.k - 1) throw std::invalid_argument("config json: d out of range");
    s.set_d(d);
    s.set_err(nj.at("err").get<int>());
    const auto& clocks = nj.at("clocks");
    if (static_cast<int>(clocks.size()) != params.clock_count())
      throw std::invalid_argument("config json: wrong clock vector length");
    for (int i = 1; i <= params.clock_count(); ++i) {
      const auto& cj = clocks[i - 1];
      s.set_c(i, cj.at("c").get<int>());
      std::string b = cj.at("b").get<std::string>();
      if (b != "up" && b != "down") throw std::invalid_argument("config json: bad arrow");
      s.set_b(i, b == "up" ? Arrow::up : Arrow::down);
    }
    cfg.states[u] = s;
  }
  return cfg;
}

inline Configuration load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open state file: " + path);
  Json j = Json::parse(in);
  return config_from_json(j);
}

// --- reports ----------------------------------------------------------------

inline Json legitimacy_report_to_json(const verify::LegitimacyReport& r) {
  Json j;
  j["legitimate"] = r.legitimate;
  auto v = Json::array();
  for (const auto& [node, pred] : r.violations) v.push_back(Json::array({node, pred}));
  j["violations"] = std::move(v);
  auto d = Json::array();
  for (const auto& [a, b, dist] : r.leader_distance_violations)
    d.push_back(Json::array({a, b, dist}));
  j["leader_distance_violations"] = std::move(d);
  return j;
}

}  // namespace rsim
