#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "rsim/graph.hpp"
#include "rsim/protocol.hpp"
#include "rsim/verifier.hpp"

namespace rsim {
namespace modelcheck {

/// Dense index space over all syntactically valid configurations: each node
/// contributes a mixed-radix digit of size k * 2 * 8^clock_count, node 0
/// being the least significant. Memory is the binding constraint, so the
/// visited structures are flat bit/byte vectors over these indices.
class ConfigSpace {
 public:
  ConfigSpace(const Graph& g, ProtocolParams params, uint64_t budget = 100000000ULL)
      : g_(g), params_(params) {
    per_node_ = static_cast<uint64_t>(params.k) * 2;
    for (int i = 0; i < params.clock_count(); ++i) per_node_ *= 8;
    total_ = 1;
    for (int u = 0; u < g.n(); ++u) {
      if (total_ > budget / per_node_)
        throw BudgetExceeded("modelcheck: state space exceeds budget");
      total_ *= per_node_;
    }
  }

  uint64_t size() const { return total_; }
  uint64_t per_node_states() const { return per_node_; }

  Configuration decode(uint64_t idx) const {
    Configuration cfg(params_, g_.n());
    for (int u = 0; u < g_.n(); ++u) {
      uint64_t digit = idx % per_node_;
      idx /= per_node_;
      NodeState s;
      s.set_d(static_cast<int>(digit % params_.k));
      digit /= params_.k;
      s.set_err(static_cast<int>(digit % 2));
      digit /= 2;
      for (int i = 1; i <= params_.clock_count(); ++i) {
        auto const clk = static_cast<int>(digit % 8);
        digit /= 8;
        s.set_c(i, clk & 3);
        s.set_b(i, (clk >> 2) ? Arrow::up : Arrow::down);
      }
      cfg.states[u] = s;
    }
    return cfg;
  }

  uint64_t encode(const Configuration& cfg) const {
    uint64_t idx = 0;
    for (int u = g_.n() - 1; u >= 0; --u) {
      const NodeState& s = cfg.states[u];
      uint64_t digit = 0;
      for (int i = params_.clock_count(); i >= 1; --i)
        digit = digit * 8 + static_cast<uint64_t>(s.c(i) | (s.b(i) == Arrow::up ? 4 : 0));
      digit = digit * 2 + static_cast<uint64_t>(s.err());
      digit = digit * params_.k + static_cast<uint64_t>(s.d());
      idx = idx * per_node_ + digit;
    }
    return idx;
  }

  const Graph& graph() const { return g_; }
  const ProtocolParams& params() const { return params_; }

 private:
  const Graph& g_;
  ProtocolParams params_;
  uint64_t per_node_ = 0;
  uint64_t total_ = 0;
};

/// All distinct configurations reachable in one step: one per nonempty subset
/// of the activable nodes, deduplicated.
inline std::vector<Configuration> successors(const Graph& g, const Configuration& cfg,
                                             const Semantics& sem = {}) {
  NodeSet activable = activable_nodes(g, cfg, sem);
  std::vector<Configuration> out;
  if (activable.empty()) return out;
  if (activable.size() > 20) throw BudgetExceeded("successors: too many activable nodes");
  uint32_t const limit = 1u << activable.size();
  for (uint32_t mask = 1; mask < limit; ++mask) {
    NodeSet sel;
    for (size_t i = 0; i < activable.size(); ++i)
      if (mask & (1u << i)) sel.push_back(activable[i]);
    Configuration next = apply_step(g, cfg, sel, sem).config;
    bool dup = false;
    for (const auto& c : out)
      if (c == next) dup = true;
    if (!dup) out.push_back(std::move(next));
  }
  return out;
}

struct Counterexample {
  std::string what;
  std::vector<Configuration> configs;
  NodeSet selection;
};

struct StateSpaceResult {
  uint64_t examined = 0;
  uint64_t legitimate_count = 0;
  bool closure_verified = false;
  bool reachability_verified = false;
  std::optional<Counterexample> counterexample;
};

namespace detail {

inline void subset_successor_indices(const ConfigSpace& space, const Configuration& cfg,
                                     const Semantics& sem, std::vector<uint64_t>& out,
                                     std::vector<NodeSet>* selections = nullptr) {
  out.clear();
  NodeSet activable = activable_nodes(space.graph(), cfg, sem);
  if (activable.empty()) return;
  if (activable.size() > 20) throw BudgetExceeded("modelcheck: too many activable nodes");
  uint32_t const limit = 1u << activable.size();
  for (uint32_t mask = 1; mask < limit; ++mask) {
    NodeSet sel;
    for (size_t i = 0; i < activable.size(); ++i)
      if (mask & (1u << i)) sel.push_back(activable[i]);
    Configuration next = apply_step(space.graph(), cfg, sel, sem).config;
    out.push_back(space.encode(next));
    if (selections) selections->push_back(std::move(sel));
  }
}

}  // namespace detail

/// Theorem check: from every legitimate configuration, every one-step
/// successor is legitimate again and keeps every d-value.
inline StateSpaceResult verify_closure(const Graph& g, int k, uint64_t budget = 100000000ULL,
                                       const Semantics& sem = {}) {
  ConfigSpace space(g, ProtocolParams(k), budget);
  StateSpaceResult res;
  res.examined = space.size();
  std::vector<uint64_t> succ;
  std::vector<NodeSet> selections;
  for (uint64_t idx = 0; idx < space.size(); ++idx) {
    Configuration cfg = space.decode(idx);
    if (!verify::legitimate(g, cfg)) continue;
    ++res.legitimate_count;
    succ.clear();
    selections.clear();
    detail::subset_successor_indices(space, cfg, sem, succ, &selections);
    for (size_t s = 0; s < succ.size(); ++s) {
      Configuration next = space.decode(succ[s]);
      bool ok = verify::legitimate(g, next);
      for (NodeId u = 0; ok && u < g.n(); ++u)
        if (next.states[u].d() != cfg.states[u].d()) ok = false;
      if (!ok) {
        res.counterexample = Counterexample{
            "closure violation: legitimate configuration has a bad successor",
            {cfg, next},
            selections[s]};
        return res;
      }
    }
  }
  res.closure_verified = true;
  return res;
}

struct ReachabilityFrom {
  bool all = true;
  uint64_t sample_count = 0;
  uint64_t seed = 0;
};

/// Theorem-2 backbone: from every configuration (or a sample), some sequence
/// of daemon choices reaches a legitimate configuration. The exhaustive mode
/// builds the full successor relation once and walks it backwards from the
/// legitimate set.
inline StateSpaceResult verify_reachability(const Graph& g, int k,
                                            ReachabilityFrom from = {},
                                            uint64_t budget = 100000000ULL,
                                            const Semantics& sem = {}) {
  ConfigSpace space(g, ProtocolParams(k), budget);
  StateSpaceResult res;

  if (!from.all) {
    Rng rng(from.seed);
    res.examined = from.sample_count;
    for (uint64_t t = 0; t < from.sample_count; ++t) {
      uint64_t const start = rng.below(space.size());
      // forward BFS from the sampled configuration until a legitimate one
      std::vector<uint64_t> frontier{start};
      std::vector<uint64_t> seen{start};
      bool found = false;
      std::vector<uint64_t> succ;
      while (!frontier.empty() && !found) {
        std::vector<uint64_t> next_frontier;
        for (uint64_t idx : frontier) {
          Configuration cfg = space.decode(idx);
          if (verify::legitimate(g, cfg)) {
            found = true;
            break;
          }
          detail::subset_successor_indices(space, cfg, sem, succ);
          for (uint64_t s : succ) {
            auto it = std::lower_bound(seen.begin(), seen.end(), s);
            if (it == seen.end() || *it != s) {
              seen.insert(it, s);
              next_frontier.push_back(s);
            }
          }
        }
        frontier = std::move(next_frontier);
      }
      if (!found) {
        res.counterexample =
            Counterexample{"reachability violation: no legitimate configuration reachable",
                           {space.decode(start)},
                           {}};
        return res;
      }
    }
    res.reachability_verified = true;
    return res;
  }

  res.examined = space.size();
  // pass 1: mark legitimate configurations, collect all forward edges
  std::vector<char> legit(space.size(), 0);
  std::vector<uint32_t> edge_from, edge_to;
  std::vector<uint64_t> succ;
  for (uint64_t idx = 0; idx < space.size(); ++idx) {
    Configuration cfg = space.decode(idx);
    bool const is_legit = verify::legitimate(g, cfg);
    if (is_legit) {
      legit[idx] = 1;
      ++res.legitimate_count;
      continue;  // closure handles what happens after; reachability is done here
    }
    detail::subset_successor_indices(space, cfg, sem, succ);
    if (succ.empty()) {
      res.counterexample = Counterexample{
          "deadlock: non-legitimate configuration with no activable node", {cfg}, {}};
      return res;
    }
    for (uint64_t s : succ) {
      edge_from.push_back(static_cast<uint32_t>(idx));
      edge_to.push_back(static_cast<uint32_t>(s));
    }
  }
  // pass 2: backward BFS over reversed edges starting from the legitimate set
  std::vector<uint32_t> rev_offset(space.size() + 1, 0);
  for (uint32_t t : edge_to) ++rev_offset[t + 1];
  for (size_t i = 1; i < rev_offset.size(); ++i) rev_offset[i] += rev_offset[i - 1];
  std::vector<uint32_t> rev_edges(edge_from.size());
  {
    std::vector<uint32_t> cursor(rev_offset.begin(), rev_offset.end() - 1);
    for (size_t e = 0; e < edge_from.size(); ++e) rev_edges[cursor[edge_to[e]]++] = edge_from[e];
  }
  std::vector<char> good(space.size(), 0);
  std::queue<uint32_t> q;
  for (uint64_t idx = 0; idx < space.size(); ++idx) {
    if (legit[idx]) {
      good[idx] = 1;
      q.push(static_cast<uint32_t>(idx));
    }
  }
  while (!q.empty()) {
    uint32_t const x = q.front();
    q.pop();
    for (uint32_t e = rev_offset[x]; e < rev_offset[x + 1]; ++e) {
      uint32_t const p = rev_edges[e];
      if (!good[p]) {
        good[p] = 1;
        q.push(p);
      }
    }
  }
  for (uint64_t idx = 0; idx < space.size(); ++idx) {
    if (!good[idx]) {
      res.counterexample =
          Counterexample{"reachability violation: no legitimate configuration reachable",
                         {space.decode(idx)},
                         {}};
      return res;
    }
  }
  res.reachability_verified = true;
  return res;
}

/// Forward-reachable set of configuration indices from one configuration,
/// used by the visited-set equivalence check against long random runs.
inline std::vector<uint64_t> reachable_set(const Graph& g, const Configuration& cfg0,
                                           uint64_t budget = 100000000ULL,
                                           const Semantics& sem = {}) {
  ConfigSpace space(g, cfg0.params, budget);
  std::vector<uint64_t> seen{space.encode(cfg0)};
  std::vector<uint64_t> frontier = seen;
  std::vector<uint64_t> succ;
  while (!frontier.empty()) {
    std::vector<uint64_t> next;
    for (uint64_t idx : frontier) {
      detail::subset_successor_indices(space, space.decode(idx), sem, succ);
      for (uint64_t s : succ) {
        auto it = std::lower_bound(seen.begin(), seen.end(), s);
        if (it == seen.end() || *it != s) {
          seen.insert(it, s);
          next.push_back(s);
        }
      }
    }
    frontier = std::move(next);
  }
  return seen;
}

}  // namespace modelcheck
}  // namespace rsim
