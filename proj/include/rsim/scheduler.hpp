#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rsim/graph.hpp"
#include "rsim/protocol.hpp"
#include "rsim/verifier.hpp"

namespace rsim {

/// Stepper with incremental activability tracking. Firing a node can only
/// change eligibility inside its closed neighborhood (the locality contract),
/// so each step re-evaluates exactly the selected nodes and their neighbors.
///
/// The running configuration hash is an order-independent fold:
///   hash = fnv(k, n) XOR fnv(u, state_u) over all u
/// which updates in O(1) per changed node and is the hash recorded in traces.
class Engine {
 public:
  Engine(const Graph& g, Configuration cfg, Semantics sem = {})
      : g_(g), cfg_(std::move(cfg)), sem_(sem) {
    if (cfg_.n() != g_.n()) throw std::invalid_argument("engine: configuration size != graph size");
    refresh_all();
  }

  const Configuration& config() const { return cfg_; }
  const Semantics& semantics() const { return sem_; }
  uint64_t config_hash() const { return hash_; }
  bool any_activable() const { return activable_count_ > 0; }

  const NodeSet& activable() {
    if (list_dirty_) {
      activable_.clear();
      for (NodeId u = 0; u < g_.n(); ++u)
        if (flags_[u]) activable_.push_back(u);
      list_dirty_ = false;
    }
    return activable_;
  }

  /// Replaces the configuration wholesale (used for fault injection).
  void set_config(Configuration cfg) {
    if (cfg.n() != g_.n()) throw std::invalid_argument("engine: configuration size != graph size");
    cfg_ = std::move(cfg);
    refresh_all();
  }

  struct Step {
    ActionSet actions;
    std::vector<std::pair<NodeId, NodeState>> delta;
    bool d_changed = false;
  };

  Step step(const NodeSet& selected) {
    if (selected.empty()) throw std::invalid_argument("engine: empty selection");
    Step out;
    std::vector<Rule> rules;
    auto wd = [&](NodeId x) { return well_defined(g_, cfg_, x); };
    auto gate = [](NodeId) { return true; };
    out.delta.reserve(selected.size());
    for (NodeId u : selected) {
      detail::eligible_rules_impl(g_, cfg_, u, sem_, wd, gate, rules);
      if (rules.empty())
        throw std::invalid_argument("engine: selected node " + std::to_string(u) +
                                    " has no eligible rule");
      StateWriter w(cfg_.states[u]);
      for (Rule r : rules) detail::command_impl(g_, cfg_, u, r, w, sem_);
      if (w.result().d() != cfg_.states[u].d()) out.d_changed = true;
      out.delta.emplace_back(u, w.result());
      out.actions.emplace_back(u, rules);
    }
    // commit after all commands have read the pre-step snapshot
    ++epoch_;
    touched_.clear();
    for (auto& [u, st] : out.delta) {
      hash_ ^= node_term(u, cfg_.states[u]);
      cfg_.states[u] = st;
      hash_ ^= node_term(u, st);
      touch(u);
      for (NodeId v : g_.neighbors(u)) touch(v);
    }
    for (NodeId u : touched_) update_flag(u);
    return out;
  }

 private:
  void refresh_all() {
    flags_.assign(g_.n(), 0);
    stamp_.assign(g_.n(), 0);
    epoch_ = 0;
    activable_count_ = 0;
    for (NodeId u = 0; u < g_.n(); ++u) {
      flags_[u] = node_activable(g_, cfg_, u, sem_) ? 1 : 0;
      activable_count_ += flags_[u];
    }
    list_dirty_ = true;
    hash_ = base_hash();
    for (NodeId u = 0; u < g_.n(); ++u) hash_ ^= node_term(u, cfg_.states[u]);
  }

  uint64_t base_hash() const { return Fnv1a().i32(cfg_.k()).i32(cfg_.n()).value(); }

  static uint64_t node_term(NodeId u, const NodeState& s) {
    return Fnv1a().i32(u).u64(s.packed()).value();
  }

  void touch(NodeId u) {
    if (stamp_[u] != epoch_) {
      stamp_[u] = epoch_;
      touched_.push_back(u);
    }
  }

  void update_flag(NodeId u) {
    char const now = node_activable(g_, cfg_, u, sem_) ? 1 : 0;
    if (now != flags_[u]) {
      flags_[u] = now;
      activable_count_ += now ? 1 : -1;
      list_dirty_ = true;
    }
  }

  const Graph& g_;
  Configuration cfg_;
  Semantics sem_;
  std::vector<char> flags_;
  std::vector<uint64_t> stamp_;
  std::vector<NodeId> touched_;
  uint64_t epoch_ = 0;
  int activable_count_ = 0;
  bool list_dirty_ = true;
  NodeSet activable_;
  uint64_t hash_ = 0;
};

// ---------------------------------------------------------------------------
// Daemons

enum class DaemonKind { synchronous, central_random, subset_random, scripted, round_robin_fair };

inline const char* daemon_name(DaemonKind k) {
  switch (k) {
    case DaemonKind::synchronous: return "synchronous";
    case DaemonKind::central_random: return "central-random";
    case DaemonKind::subset_random: return "subset-random";
    case DaemonKind::scripted: return "scripted";
    case DaemonKind::round_robin_fair: return "round-robin";
  }
  return "?";
}

/// Selects, each step, the nonempty set of activable nodes to fire.
///
/// SubsetRandom(p) is the canonical stand-in for the fairness assumption the
/// protocol is proved under: every nonempty subset of the activable set has
/// positive probability each step, so on a finite state space every reachable
/// configuration is eventually visited. RoundRobinFair is a deterministic
/// smoke-test scheduler only; it does not provide that guarantee in general.
struct Daemon {
  DaemonKind kind = DaemonKind::subset_random;
  double p = 0.5;
  std::vector<NodeSet> script;
  size_t script_pos = 0;
  NodeId rr_cursor = 0;

  static Daemon synchronous() { return {DaemonKind::synchronous}; }
  static Daemon central_random() { return {DaemonKind::central_random}; }
  static Daemon subset_random(double p) {
    if (p <= 0.0 || p > 1.0) throw std::invalid_argument("subset daemon: need 0 < p <= 1");
    Daemon d{DaemonKind::subset_random};
    d.p = p;
    return d;
  }
  static Daemon scripted(std::vector<NodeSet> steps) {
    Daemon d{DaemonKind::scripted};
    d.script = std::move(steps);
    return d;
  }
  static Daemon round_robin() { return {DaemonKind::round_robin_fair}; }

  NodeSet select(const NodeSet& activable, Rng& rng) {
    if (activable.empty()) throw std::invalid_argument("daemon: activable set is empty");
    switch (kind) {
      case DaemonKind::synchronous:
        return activable;
      case DaemonKind::central_random:
        return {activable[rng.below(activable.size())]};
      case DaemonKind::subset_random: {
        NodeSet out;
        while (out.empty()) {
          for (NodeId u : activable)
            if (rng.bernoulli(p)) out.push_back(u);
        }
        return out;
      }
      case DaemonKind::scripted: {
        if (script_pos >= script.size())
          throw std::invalid_argument("scripted daemon: script exhausted");
        NodeSet out;
        for (NodeId u : script[script_pos])
          if (node_set_contains(activable, u)) out.push_back(u);
        ++script_pos;
        if (out.empty())
          throw std::invalid_argument("scripted daemon: scripted set has no activable node");
        return out;
      }
      case DaemonKind::round_robin_fair: {
        for (size_t tries = 0; tries <= activable.size(); ++tries) {
          auto it = std::lower_bound(activable.begin(), activable.end(), rr_cursor);
          if (it == activable.end()) {
            rr_cursor = 0;
            it = activable.begin();
          }
          rr_cursor = *it + 1;
          return {*it};
        }
        return {activable.front()};
      }
    }
    return activable;
  }
};

// ---------------------------------------------------------------------------
// Run driver

enum class TerminationReason { legitimate_reached, step_cap, stationary_fixpoint };

inline const char* termination_name(TerminationReason r) {
  switch (r) {
    case TerminationReason::legitimate_reached: return "legitimate_reached";
    case TerminationReason::step_cap: return "step_cap";
    case TerminationReason::stationary_fixpoint: return "stationary_fixpoint";
  }
  return "?";
}

struct RunResult {
  Configuration final_config;
  int64_t steps = 0;
  TerminationReason reason = TerminationReason::step_cap;
  /// First step index at which the stop predicate held (-1 if never).
  int64_t first_stop_step = -1;
  uint64_t final_hash = 0;
  /// Hash chain over every post-step configuration; the trace handle.
  uint64_t chain = 0;
};

struct Injection {
  int64_t step = 0;
  int m = 0;
};

struct TraceStep {
  int64_t step = 0;
  bool injected = false;
  const NodeSet* selected = nullptr;
  const ActionSet* actions = nullptr;
  const std::vector<std::pair<NodeId, NodeState>>* delta = nullptr;
  uint64_t config_hash = 0;
  uint64_t chain = 0;
};

using TraceFn = std::function<void(const TraceStep&)>;

struct RunOptions {
  std::vector<Injection> injections;  // sorted by step
  Semantics semantics;
};

inline uint64_t chain_extend(uint64_t chain, uint64_t config_hash) {
  return Fnv1a().u64(chain).u64(config_hash).value();
}

/// Repeatedly select + apply_step until the stop predicate holds, nothing is
/// activable, or the step cap is hit. Pending fault injections keep a run
/// alive past the stop predicate; with nothing activable the step counter
/// fast-forwards to the next injection.
template <class StopFn>
RunResult run(const Graph& g, Configuration cfg0, Daemon& daemon, int64_t cap, StopFn&& stop,
              Rng& rng, const RunOptions& opts = {}, const TraceFn& trace = nullptr) {
  Engine eng(g, std::move(cfg0), opts.semantics);
  RunResult res;
  res.chain = eng.config_hash();
  size_t inj = 0;
  while (true) {
    while (inj < opts.injections.size() && opts.injections[inj].step <= res.steps) {
      Configuration scrambled = verify::inject_faults(eng.config(), opts.injections[inj].m, rng);
      std::vector<std::pair<NodeId, NodeState>> delta;
      for (NodeId u = 0; u < scrambled.n(); ++u)
        if (!(scrambled.states[u] == eng.config().states[u]))
          delta.emplace_back(u, scrambled.states[u]);
      eng.set_config(std::move(scrambled));
      res.chain = chain_extend(res.chain, eng.config_hash());
      if (trace) {
        TraceStep ev;
        ev.step = res.steps;
        ev.injected = true;
        ev.delta = &delta;
        ev.config_hash = eng.config_hash();
        ev.chain = res.chain;
        trace(ev);
      }
      ++inj;
    }
    if (stop(eng.config())) {
      if (res.first_stop_step < 0) res.first_stop_step = res.steps;
      if (inj >= opts.injections.size()) {
        res.reason = TerminationReason::legitimate_reached;
        break;
      }
    }
    if (!eng.any_activable()) {
      if (inj < opts.injections.size()) {
        res.steps = opts.injections[inj].step;
        continue;
      }
      res.reason = TerminationReason::stationary_fixpoint;
      break;
    }
    if (res.steps >= cap) {
      res.reason = TerminationReason::step_cap;
      break;
    }
    NodeSet selected = daemon.select(eng.activable(), rng);
    Engine::Step st = eng.step(selected);
    ++res.steps;
    res.chain = chain_extend(res.chain, eng.config_hash());
    if (trace) {
      TraceStep ev;
      ev.step = res.steps;
      ev.selected = &selected;
      ev.actions = &st.actions;
      ev.delta = &st.delta;
      ev.config_hash = eng.config_hash();
      ev.chain = res.chain;
      trace(ev);
    }
  }
  res.final_config = eng.config();
  res.final_hash = eng.config_hash();
  return res;
}

inline RunResult run_to_legitimacy(const Graph& g, Configuration cfg0, Daemon& daemon,
                                   int64_t cap, Rng& rng, const RunOptions& opts = {},
                                   const TraceFn& trace = nullptr) {
  auto stop = [&](const Configuration& c) { return verify::legitimate(g, c); };
  return run(g, std::move(cfg0), daemon, cap, stop, rng, opts, trace);
}

}  // namespace rsim
