#pragma once

#include <fstream>
#include <string>

#include "rsim/json_io.hpp"
#include "rsim/scheduler.hpp"

namespace rsim {

/// JSONL trace: a header line carrying the graph hash and the full initial
/// configuration, then one line per step with the fired rules, the post-step
/// configuration hash and the running chain hash. With `full` set, each step
/// also carries the per-node state delta so the run can be replayed and the
/// hash chain re-derived by an independent reader.
class TraceWriter {
 public:
  TraceWriter(const std::string& path, bool full) : out_(path), full_(full) {
    if (!out_) throw std::invalid_argument("cannot open trace file: " + path);
  }

  void write_header(const Graph& g, const Configuration& cfg0, uint64_t cfg0_hash,
                    const std::string& daemon, uint64_t seed) {
    Json j;
    j["type"] = "header";
    j["version"] = 1;
    j["k"] = cfg0.k();
    j["n"] = cfg0.n();
    j["daemon"] = daemon;
    j["seed"] = seed;
    j["graph_hash"] = hash_hex(g.hash());
    j["config_hash"] = hash_hex(cfg0_hash);
    j["chain"] = hash_hex(cfg0_hash);
    if (full_) {
      auto states = Json::array();
      for (const auto& s : cfg0.states) states.push_back(hash_hex(s.packed()));
      j["states"] = std::move(states);
    }
    out_ << j.dump() << "\n";
  }

  void write_step(const TraceStep& ev) {
    Json j;
    j["type"] = ev.injected ? "inject" : "step";
    j["t"] = ev.step;
    if (ev.selected) j["selected"] = *ev.selected;
    if (ev.actions) {
      Json fired = Json::object();
      for (const auto& [node, rules] : *ev.actions) {
        auto names = Json::array();
        for (Rule r : rules) names.push_back(rule_name(r));
        fired[std::to_string(node)] = std::move(names);
      }
      j["fired"] = std::move(fired);
    }
    j["hash"] = hash_hex(ev.config_hash);
    j["chain"] = hash_hex(ev.chain);
    if (full_ && ev.delta) {
      auto delta = Json::array();
      for (const auto& [node, st] : *ev.delta)
        delta.push_back(Json::array({node, hash_hex(st.packed())}));
      j["delta"] = std::move(delta);
    }
    out_ << j.dump() << "\n";
  }

  TraceFn callback() {
    return [this](const TraceStep& ev) { write_step(ev); };
  }

 private:
  std::ofstream out_;
  bool full_;
};

struct ReplayResult {
  bool ok = false;
  int64_t steps = 0;
  std::string error;
  uint64_t final_chain = 0;
};

inline uint64_t parse_hash_hex(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}

/// Re-derives the configuration hash chain of a full trace from the recorded
/// deltas and checks every recorded hash against it.
inline ReplayResult replay_trace(const std::string& path, const Graph& g) {
  ReplayResult res;
  std::ifstream in(path);
  if (!in) {
    res.error = "cannot open trace file";
    return res;
  }
  std::string line;
  if (!std::getline(in, line)) {
    res.error = "empty trace";
    return res;
  }
  Json header = Json::parse(line);
  if (header.value("type", "") != "header") {
    res.error = "missing header";
    return res;
  }
  if (!header.contains("states")) {
    res.error = "trace was not recorded with deltas (use --trace-full)";
    return res;
  }
  if (parse_hash_hex(header.at("graph_hash").get<std::string>()) != g.hash()) {
    res.error = "graph hash mismatch";
    return res;
  }
  ProtocolParams params(header.at("k").get<int>());
  Configuration cfg(params, header.at("n").get<int>());
  const auto& states = header.at("states");
  if (static_cast<int>(states.size()) != cfg.n()) {
    res.error = "header state array has wrong length";
    return res;
  }
  for (int u = 0; u < cfg.n(); ++u)
    cfg.states[u] = NodeState::from_packed(parse_hash_hex(states[u].get<std::string>()));

  auto config_hash = [&](const Configuration& c) {
    uint64_t h = Fnv1a().i32(c.k()).i32(c.n()).value();
    for (NodeId u = 0; u < c.n(); ++u)
      h ^= Fnv1a().i32(u).u64(c.states[u].packed()).value();
    return h;
  };

  uint64_t chain = config_hash(cfg);
  if (chain != parse_hash_hex(header.at("config_hash").get<std::string>())) {
    res.error = "initial configuration hash mismatch";
    return res;
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json ev = Json::parse(line);
    std::string const type = ev.value("type", "");
    if (type != "step" && type != "inject") continue;
    if (!ev.contains("delta")) {
      res.error = "step without delta at t=" + std::to_string(ev.value("t", -1));
      return res;
    }
    for (const auto& d : ev.at("delta")) {
      NodeId const u = d[0].get<NodeId>();
      if (u < 0 || u >= cfg.n()) {
        res.error = "delta node out of range";
        return res;
      }
      cfg.states[u] = NodeState::from_packed(parse_hash_hex(d[1].get<std::string>()));
    }
    uint64_t const h = config_hash(cfg);
    if (h != parse_hash_hex(ev.at("hash").get<std::string>())) {
      res.error = "configuration hash mismatch at t=" + std::to_string(ev.value("t", -1));
      return res;
    }
    chain = chain_extend(chain, h);
    if (chain != parse_hash_hex(ev.at("chain").get<std::string>())) {
      res.error = "chain hash mismatch at t=" + std::to_string(ev.value("t", -1));
      return res;
    }
    ++res.steps;
  }
  res.ok = true;
  res.final_chain = chain;
  return res;
}

}  // namespace rsim
