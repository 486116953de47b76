#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rsim/graph.hpp"
#include "rsim/hash.hpp"
#include "rsim/rng.hpp"

namespace rsim {

/// Engine faults are programming errors (a command fired with a false guard,
/// two commands writing conflicting values to one variable). They are never
/// expected on valid inputs and abort the run loudly.
struct EngineFault : std::logic_error {
  explicit EngineFault(const std::string& what) : std::logic_error(what) {}
};

enum class Arrow : uint8_t { down = 0, up = 1 };

struct ProtocolParams {
  int k = 3;

  ProtocolParams() = default;
  explicit ProtocolParams(int k_) : k(k_) {
    if (k < 3) throw std::invalid_argument("protocol: k must be >= 3");
    if (k > 40) throw std::invalid_argument("protocol: k > 40 is beyond the packed state layout");
  }

  /// floor(k/2); nodes at this distance or farther are outside every clock
  /// system.
  int half() const { return k / 2; }

  /// Number of clock indices, i in [1, clock_count()]. Zero for k = 3.
  int clock_count() const { return std::max(0, k / 2 - 1); }

  bool operator==(const ProtocolParams&) const = default;
};

/// One node's local variables, bit-packed into a single word:
/// bits 0..5 hold d, bit 6 holds err, and clock index i (1-based) holds
/// (c_i, b_i) in the 3 bits starting at 7 + 3*(i-1). The packing doubles as
/// the canonical form hashed by traces and the model checker.
class NodeState {
 public:
  NodeState() = default;

  int d() const { return static_cast<int>(w_ & 0x3F); }
  int err() const { return static_cast<int>((w_ >> 6) & 1); }
  int c(int i) const { return static_cast<int>((w_ >> shift(i)) & 3); }
  Arrow b(int i) const { return static_cast<Arrow>((w_ >> (shift(i) + 2)) & 1); }

  void set_d(int v) {
    if (v < 0 || v > 63) throw EngineFault("node state: d out of range");
    w_ = (w_ & ~uint64_t{0x3F}) | static_cast<uint64_t>(v);
  }
  void set_err(int v) {
    if (v != 0 && v != 1) throw EngineFault("node state: err out of range");
    w_ = (w_ & ~(uint64_t{1} << 6)) | (static_cast<uint64_t>(v) << 6);
  }
  void set_c(int i, int v) {
    if (v < 0 || v > 3) throw EngineFault("node state: clock value out of range");
    w_ = (w_ & ~(uint64_t{3} << shift(i))) | (static_cast<uint64_t>(v) << shift(i));
  }
  void set_b(int i, Arrow a) {
    w_ = (w_ & ~(uint64_t{1} << (shift(i) + 2))) |
         (static_cast<uint64_t>(a) << (shift(i) + 2));
  }

  uint64_t packed() const { return w_; }
  static NodeState from_packed(uint64_t w) {
    NodeState s;
    s.w_ = w;
    return s;
  }

  bool operator==(const NodeState&) const = default;

 private:
  static int shift(int i) { return 7 + 3 * (i - 1); }
  uint64_t w_ = 0;
};

/// Global snapshot: parameter k plus one NodeState per node. A value type;
/// safe to copy and move between threads.
struct Configuration {
  ProtocolParams params;
  std::vector<NodeState> states;

  Configuration() = default;
  Configuration(ProtocolParams p, int n) : params(p), states(n) {}

  int k() const { return params.k; }
  int n() const { return static_cast<int>(states.size()); }

  uint64_t hash() const {
    Fnv1a h;
    h.i32(params.k).i32(n());
    for (const auto& s : states) h.u64(s.packed());
    return h.value();
  }

  bool operator==(const Configuration&) const = default;
};

inline NodeState random_node_state(const ProtocolParams& p, Rng& rng) {
  NodeState s;
  s.set_d(rng.below_int(p.k));
  s.set_err(rng.below_int(2));
  for (int i = 1; i <= p.clock_count(); ++i) {
    s.set_c(i, rng.below_int(4));
    s.set_b(i, rng.below(2) ? Arrow::up : Arrow::down);
  }
  return s;
}

inline Configuration random_configuration(const ProtocolParams& p, int n, Rng& rng) {
  Configuration cfg(p, n);
  for (auto& s : cfg.states) s = random_node_state(p, rng);
  return cfg;
}

// ---------------------------------------------------------------------------
// Rules

enum class Rule : uint8_t {
  update_distance,     // priority 0
  leader_down,         // priority 1
  two_heads,           // priority 1
  branch_incoherence,  // priority 1
  remote_collision,    // priority 1
  incr_leader,         // priority 2, stationary
  sync1_down,          // priority 2, stationary
  sync2_plus_down,     // priority 2, stationary
  sync1_plus_up,       // priority 2, stationary
  sync_end_of_chain,   // priority 2, stationary
  become_leader,       // priority 2
  error_spread,        // priority 2
  reset_error,         // priority 2
};

constexpr int kRuleCount = 13;

constexpr std::array<Rule, kRuleCount> all_rules() {
  return {Rule::update_distance, Rule::leader_down,       Rule::two_heads,
          Rule::branch_incoherence, Rule::remote_collision, Rule::incr_leader,
          Rule::sync1_down,        Rule::sync2_plus_down,  Rule::sync1_plus_up,
          Rule::sync_end_of_chain, Rule::become_leader,    Rule::error_spread,
          Rule::reset_error};
}

constexpr int rule_priority(Rule r) {
  switch (r) {
    case Rule::update_distance:
      return 0;
    case Rule::leader_down:
    case Rule::two_heads:
    case Rule::branch_incoherence:
    case Rule::remote_collision:
      return 1;
    default:
      return 2;
  }
}

/// Stationary rules keep the clock systems turning in legitimate
/// configurations; all others only fire on the way there.
constexpr bool rule_is_stationary(Rule r) {
  switch (r) {
    case Rule::incr_leader:
    case Rule::sync1_down:
    case Rule::sync2_plus_down:
    case Rule::sync1_plus_up:
    case Rule::sync_end_of_chain:
      return true;
    default:
      return false;
  }
}

inline const char* rule_name(Rule r) {
  switch (r) {
    case Rule::update_distance: return "update_distance";
    case Rule::leader_down: return "leader_down";
    case Rule::two_heads: return "two_heads";
    case Rule::branch_incoherence: return "branch_incoherence";
    case Rule::remote_collision: return "remote_collision";
    case Rule::incr_leader: return "incr_leader";
    case Rule::sync1_down: return "sync1_down";
    case Rule::sync2_plus_down: return "sync2_plus_down";
    case Rule::sync1_plus_up: return "sync1_plus_up";
    case Rule::sync_end_of_chain: return "sync_end_of_chain";
    case Rule::become_leader: return "become_leader";
    case Rule::error_spread: return "error_spread";
    case Rule::reset_error: return "reset_error";
  }
  return "?";
}

inline std::optional<Rule> rule_from_name(const std::string& name) {
  for (Rule r : all_rules())
    if (name == rule_name(r)) return r;
  return std::nullopt;
}

/// Engine variants used by regression tests. The default is the shipped
/// semantics; tests flip flags to confirm that the corresponding guard
/// condition is load-bearing.
struct Semantics {
  /// Incr Leader additionally requires every neighbor's arrow to point up;
  /// without it, a leader can advance its clock past a child that has not
  /// finished the previous cycle, which breaks closure.
  bool incr_leader_requires_up = true;
};

// ---------------------------------------------------------------------------
// Predicates. Each reads only u's state and u's neighbors' states.

inline bool well_defined(const Graph& g, const Configuration& cfg, NodeId u) {
  const NodeState& s = cfg.states[u];
  if (s.err() != 0) return false;
  int const du = s.d();
  bool has_parent = false;
  for (NodeId v : g.neighbors(u)) {
    int const dv = cfg.states[v].d();
    if (dv < du - 1 || dv > du + 1) return false;
    if (dv == du - 1) has_parent = true;
  }
  return du == 0 || has_parent;
}

inline bool leader_down(const Graph&, const Configuration& cfg, NodeId u) {
  const NodeState& s = cfg.states[u];
  if (s.d() != 0) return true;
  int const cc = cfg.params.clock_count();
  for (int i = 1; i <= cc; ++i)
    if (s.b(i) == Arrow::up) return false;
  return true;
}

/// Allowed (b_iu, b_iv, c_iv) patterns against a neighbor one level closer to
/// the leader (d_v = d_u - 1). Clock arithmetic is mod 4.
inline bool branch_coherence_up(const Graph& g, const Configuration& cfg, NodeId u, int i) {
  const NodeState& s = cfg.states[u];
  int const du = s.d();
  int const cu = s.c(i);
  Arrow const bu = s.b(i);
  for (NodeId v : g.neighbors(u)) {
    const NodeState& t = cfg.states[v];
    if (t.d() != du - 1) continue;
    int const cv = t.c(i);
    Arrow const bv = t.b(i);
    bool ok;
    if (bu == Arrow::up) {
      ok = (bv == Arrow::up && cv == cu) || (bv == Arrow::down && cv == cu) ||
           (bv == Arrow::down && cv == (cu + 1) % 4);
    } else {
      ok = bv == Arrow::down && cv == cu;
    }
    if (!ok) return false;
  }
  return true;
}

/// Mirror patterns against a neighbor one level farther (d_v = d_u + 1).
inline bool branch_coherence_down(const Graph& g, const Configuration& cfg, NodeId u, int i) {
  const NodeState& s = cfg.states[u];
  int const du = s.d();
  int const cu = s.c(i);
  Arrow const bu = s.b(i);
  for (NodeId v : g.neighbors(u)) {
    const NodeState& t = cfg.states[v];
    if (t.d() != du + 1) continue;
    int const cv = t.c(i);
    Arrow const bv = t.b(i);
    bool ok;
    if (bu == Arrow::up) {
      ok = bv == Arrow::up && cv == cu;
    } else {
      ok = (bv == Arrow::up && cv == cu) || (bv == Arrow::up && cv == (cu + 3) % 4) ||
           (bv == Arrow::down && cv == cu);
    }
    if (!ok) return false;
  }
  return true;
}

inline bool branch_coherence(const Graph& g, const Configuration& cfg, NodeId u) {
  int const du = cfg.states[u].d();
  int const half = cfg.params.half();
  int const cc = cfg.params.clock_count();
  if (du >= half) return true;
  // the up-helper at the node's own index applies only when it names a clock
  if (du >= 1 && du <= cc && !branch_coherence_up(g, cfg, u, du)) return false;
  for (int i = du + 1; i <= cc; ++i) {
    if (!branch_coherence_up(g, cfg, u, i)) return false;
    if (!branch_coherence_down(g, cfg, u, i)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Guard evaluation.

namespace detail {

constexpr int kNoNeighbor = std::numeric_limits<int>::max();

inline int min_neighbor_d(const Graph& g, const Configuration& cfg, NodeId u) {
  int m = kNoNeighbor;
  for (NodeId v : g.neighbors(u)) m = std::min(m, cfg.states[v].d());
  return m;
}

inline int update_distance_target(const Graph& g, const Configuration& cfg, NodeId u) {
  int const m = min_neighbor_d(g, cfg, u);
  if (m == kNoNeighbor) return cfg.k() - 1;
  return std::min(m + 1, cfg.k() - 1);
}

/// Guard of one rule at u. `wd` supplies the well_defined predicate (the
/// layered composition substitutes its per-layer variant) and
/// `become_leader_gate` its extra Become Leader condition.
template <class WellDefinedFn, class BecomeLeaderGateFn>
bool guard_impl(const Graph& g, const Configuration& cfg, NodeId u, Rule rule,
                const Semantics& sem, WellDefinedFn&& wd,
                BecomeLeaderGateFn&& become_leader_gate) {
  const NodeState& s = cfg.states[u];
  int const k = cfg.k();
  int const half = cfg.params.half();
  int const cc = cfg.params.clock_count();
  int const du = s.d();

  switch (rule) {
    case Rule::update_distance:
      return du != 0 && du != update_distance_target(g, cfg, u);

    case Rule::leader_down: {
      if (du != 0 || !wd(u)) return false;
      for (int i = 1; i <= cc; ++i)
        if (s.b(i) == Arrow::up) return true;
      return false;
    }

    case Rule::two_heads: {
      if (s.err() != 0) return false;
      int zeros = du == 0 ? 1 : 0;
      for (NodeId v : g.neighbors(u)) {
        if (cfg.states[v].d() == 0 && ++zeros >= 2) return true;
      }
      return false;
    }

    case Rule::branch_incoherence:
      return s.err() == 0 && !branch_coherence(g, cfg, u);

    case Rule::remote_collision: {
      // Two closed-neighborhood nodes at equal depth m whose index-m clocks
      // are out of sync by exactly 2 witness two leaders closer than k.
      if (s.err() != 0 || 2 * du > k - 1 || cc == 0) return false;
      for (int m = 1; m <= cc; ++m) {
        unsigned seen = 0;
        if (du == m) seen |= 1u << s.c(m);
        for (NodeId v : g.neighbors(u)) {
          const NodeState& t = cfg.states[v];
          if (t.d() == m) seen |= 1u << t.c(m);
        }
        if ((seen & 0b0101u) == 0b0101u || (seen & 0b1010u) == 0b1010u) return true;
      }
      return false;
    }

    case Rule::incr_leader: {
      if (du != 0 || cc == 0 || !wd(u)) return false;
      for (NodeId v : g.neighbors(u))
        if (cfg.states[v].d() != 1) return false;
      for (int i = 1; i <= cc; ++i) {
        bool ok = true;
        for (NodeId v : g.neighbors(u)) {
          const NodeState& t = cfg.states[v];
          if (t.c(i) != s.c(i) || (sem.incr_leader_requires_up && t.b(i) != Arrow::up)) {
            ok = false;
            break;
          }
        }
        if (ok) return true;
      }
      return false;
    }

    case Rule::sync1_down: {
      if (du != 1 || cc == 0 || !wd(u)) return false;
      NodeId leader = -1;
      for (NodeId v : g.neighbors(u)) {
        if (cfg.states[v].d() == 0) {
          if (leader != -1) return false;  // two leader neighbors: not ours to sync
          leader = v;
        }
      }
      if (leader == -1) return false;
      const NodeState& t = cfg.states[leader];
      for (int i = 1; i <= cc; ++i)
        if (s.b(i) == Arrow::up && (s.c(i) + 1) % 4 == t.c(i)) return true;
      return false;
    }

    case Rule::sync2_plus_down: {
      if (du <= 1 || du >= half || !wd(u)) return false;
      for (int i = du; i <= cc; ++i) {
        if (s.b(i) != Arrow::up) continue;
        bool ok = true;
        for (NodeId v : g.neighbors(u)) {
          const NodeState& t = cfg.states[v];
          if (t.d() != du - 1) continue;
          if (t.b(i) != Arrow::down || t.c(i) != (s.c(i) + 1) % 4) {
            ok = false;
            break;
          }
        }
        if (ok) return true;
      }
      return false;
    }

    case Rule::sync1_plus_up: {
      if (du <= 0 || du >= half || !wd(u)) return false;
      for (int i = du + 1; i <= cc; ++i) {
        if (s.b(i) != Arrow::down) continue;
        bool ok = true;
        for (NodeId v : g.neighbors(u)) {
          const NodeState& t = cfg.states[v];
          if (t.d() != du + 1) continue;
          if (t.b(i) != Arrow::up || t.c(i) != s.c(i)) {
            ok = false;
            break;
          }
        }
        if (ok) return true;  // vacuously true at the figurative end of the area
      }
      return false;
    }

    case Rule::sync_end_of_chain: {
      // Node at depth d_u is the last carrier of clock index d_u; it turns
      // the wave around as soon as every parent agrees on the new value.
      if (du < 1 || du > cc || !wd(u)) return false;
      if (s.b(du) != Arrow::down) return false;
      bool has_parent = false;
      for (NodeId v : g.neighbors(u)) {
        const NodeState& t = cfg.states[v];
        if (t.d() != du - 1) continue;
        has_parent = true;
        if (t.b(du) != Arrow::down || t.c(du) != s.c(du)) return false;
      }
      return has_parent;
    }

    case Rule::become_leader: {
      if (s.err() != 0 || du != k - 1) return false;
      for (NodeId v : g.neighbors(u))
        if (cfg.states[v].d() != k - 1) return false;
      return become_leader_gate(u);
    }

    case Rule::error_spread: {
      if (s.err() != 0 || du > half - 1) return false;
      for (NodeId v : g.neighbors(u)) {
        const NodeState& t = cfg.states[v];
        if (t.err() == 1 && du < t.d()) return true;
      }
      return false;
    }

    case Rule::reset_error: {
      if (s.err() != 1) return false;
      if (du > half) return true;
      for (NodeId v : g.neighbors(u)) {
        const NodeState& t = cfg.states[v];
        if (t.d() < du && t.err() != 1) return false;
      }
      return true;
    }
  }
  return false;
}

}  // namespace detail

inline bool guard(const Graph& g, const Configuration& cfg, NodeId u, Rule rule,
                  const Semantics& sem = {}) {
  auto wd = [&](NodeId x) { return well_defined(g, cfg, x); };
  auto gate = [](NodeId) { return true; };
  return detail::guard_impl(g, cfg, u, rule, sem, wd, gate);
}

// ---------------------------------------------------------------------------
// Commands. Writes go through a conflict-checking collector so that two rules
// firing together at one node can never silently disagree on a variable.

class StateWriter {
 public:
  explicit StateWriter(NodeState pre) : out_(pre) {}

  void write_d(int v) { put(0, v, [&] { out_.set_d(v); }); }
  void write_err(int v) { put(1, v, [&] { out_.set_err(v); }); }
  void write_c(int i, int v) { put(2 * i, v, [&] { out_.set_c(i, v); }); }
  void write_b(int i, Arrow a) {
    put(2 * i + 1, static_cast<int>(a), [&] { out_.set_b(i, a); });
  }

  const NodeState& result() const { return out_; }
  bool wrote_d() const { return (mask_ & 1) != 0; }

 private:
  template <class Apply>
  void put(int field, int value, Apply&& apply) {
    uint64_t const bit = uint64_t{1} << field;
    if (mask_ & bit) {
      if (values_[field] != value)
        throw EngineFault("write conflict: two rules disagree on one variable");
      return;
    }
    mask_ |= bit;
    values_[field] = value;
    apply();
  }

  NodeState out_;
  uint64_t mask_ = 0;
  std::array<int, 42> values_{};
};

namespace detail {

/// Executes `rule`'s command for u against the pre-step configuration,
/// accumulating writes in `w`. The guard must hold in `cfg`.
inline void command_impl(const Graph& g, const Configuration& cfg, NodeId u, Rule rule,
                         StateWriter& w, const Semantics& sem = {}) {
  const NodeState& s = cfg.states[u];
  int const half = cfg.params.half();
  int const cc = cfg.params.clock_count();
  int const du = s.d();

  switch (rule) {
    case Rule::update_distance: {
      int const nd = update_distance_target(g, cfg, u);
      w.write_d(nd);
      if (nd < half) {
        // deterministic choose(): lowest-handle neighbor one level closer,
        // evaluated against the new distance
        NodeId parent = -1;
        for (NodeId v : g.neighbors(u)) {
          if (cfg.states[v].d() == nd - 1) {
            parent = v;
            break;
          }
        }
        if (parent == -1) throw EngineFault("update_distance: no parent to copy clocks from");
        const NodeState& t = cfg.states[parent];
        for (int i = nd; i <= cc; ++i) {
          w.write_c(i, t.c(i));
          w.write_b(i, t.b(i));
        }
      }
      return;
    }

    case Rule::leader_down:
      for (int i = 1; i <= cc; ++i) w.write_b(i, Arrow::down);
      return;

    case Rule::two_heads:
    case Rule::branch_incoherence:
    case Rule::remote_collision:
      w.write_err(1);
      return;

    case Rule::incr_leader: {
      for (int i = 1; i <= cc; ++i) {
        bool ok = true;
        for (NodeId v : g.neighbors(u)) {
          const NodeState& t = cfg.states[v];
          if (t.c(i) != s.c(i) || (sem.incr_leader_requires_up && t.b(i) != Arrow::up)) {
            ok = false;
            break;
          }
        }
        if (ok) w.write_c(i, (s.c(i) + 1) % 4);
      }
      return;
    }

    case Rule::sync1_down: {
      NodeId leader = -1;
      for (NodeId v : g.neighbors(u))
        if (cfg.states[v].d() == 0) leader = v;
      const NodeState& t = cfg.states[leader];
      for (int i = 1; i <= cc; ++i) {
        if (s.b(i) == Arrow::up && (s.c(i) + 1) % 4 == t.c(i)) {
          w.write_c(i, t.c(i));
          w.write_b(i, Arrow::down);
        }
      }
      return;
    }

    case Rule::sync2_plus_down: {
      for (int i = du; i <= cc; ++i) {
        if (s.b(i) != Arrow::up) continue;
        bool ok = true;
        for (NodeId v : g.neighbors(u)) {
          const NodeState& t = cfg.states[v];
          if (t.d() == du - 1 && (t.b(i) != Arrow::down || t.c(i) != (s.c(i) + 1) % 4)) {
            ok = false;
            break;
          }
        }
        if (ok) {
          w.write_c(i, (s.c(i) + 1) % 4);
          w.write_b(i, Arrow::down);
        }
      }
      return;
    }

    case Rule::sync1_plus_up: {
      for (int i = du + 1; i <= cc; ++i) {
        if (s.b(i) != Arrow::down) continue;
        bool ok = true;
        for (NodeId v : g.neighbors(u)) {
          const NodeState& t = cfg.states[v];
          if (t.d() == du + 1 && (t.b(i) != Arrow::up || t.c(i) != s.c(i))) {
            ok = false;
            break;
          }
        }
        if (ok) w.write_b(i, Arrow::up);
      }
      return;
    }

    case Rule::sync_end_of_chain:
      w.write_b(du, Arrow::up);
      return;

    case Rule::become_leader:
      w.write_d(0);
      for (int i = 1; i <= cc; ++i) {
        w.write_c(i, 0);
        w.write_b(i, Arrow::down);
      }
      return;

    case Rule::error_spread:
      w.write_err(1);
      return;

    case Rule::reset_error:
      w.write_err(0);
      if (du == 0) w.write_d(1);
      for (int i = 1; i <= cc; ++i) {
        w.write_c(i, 0);
        w.write_b(i, Arrow::up);
      }
      return;
  }
}

/// All activable rules at u whose priority equals the minimum priority among
/// u's activable rules (empty if none is activable). Evaluated tier by tier.
template <class WellDefinedFn, class BecomeLeaderGateFn>
void eligible_rules_impl(const Graph& g, const Configuration& cfg, NodeId u,
                         const Semantics& sem, WellDefinedFn&& wd,
                         BecomeLeaderGateFn&& gate, std::vector<Rule>& out) {
  out.clear();
  for (int prio = 0; prio <= 2; ++prio) {
    for (Rule r : all_rules()) {
      if (rule_priority(r) != prio) continue;
      if (guard_impl(g, cfg, u, r, sem, wd, gate)) out.push_back(r);
    }
    if (!out.empty()) return;
  }
}

}  // namespace detail

/// New state for u after executing `rule`'s command against pre-step `cfg`.
inline NodeState command(const Graph& g, const Configuration& cfg, NodeId u, Rule rule,
                         const Semantics& sem = {}) {
  if (!guard(g, cfg, u, rule, sem))
    throw EngineFault(std::string("command invoked with false guard: ") + rule_name(rule));
  StateWriter w(cfg.states[u]);
  detail::command_impl(g, cfg, u, rule, w, sem);
  return w.result();
}

inline std::vector<Rule> eligible_rules(const Graph& g, const Configuration& cfg, NodeId u,
                                        const Semantics& sem = {}) {
  std::vector<Rule> out;
  auto wd = [&](NodeId x) { return well_defined(g, cfg, x); };
  auto gate = [](NodeId) { return true; };
  detail::eligible_rules_impl(g, cfg, u, sem, wd, gate, out);
  return out;
}

inline bool node_activable(const Graph& g, const Configuration& cfg, NodeId u,
                           const Semantics& sem = {}) {
  return !eligible_rules(g, cfg, u, sem).empty();
}

inline NodeSet activable_nodes(const Graph& g, const Configuration& cfg,
                               const Semantics& sem = {}) {
  NodeSet out;
  for (NodeId u = 0; u < g.n(); ++u)
    if (node_activable(g, cfg, u, sem)) out.push_back(u);
  return out;
}

/// Rules fired per node in one step.
using ActionSet = std::vector<std::pair<NodeId, std::vector<Rule>>>;

struct StepOutcome {
  Configuration config;
  ActionSet actions;
  bool d_changed = false;
};

/// One daemon step: every selected node executes all of its eligible rules,
/// in rule declaration order, with every command reading the pre-step
/// configuration. Non-selected nodes are unchanged.
inline StepOutcome apply_step(const Graph& g, const Configuration& cfg, const NodeSet& selected,
                              const Semantics& sem = {}) {
  if (selected.empty()) throw std::invalid_argument("apply_step: empty selection");
  StepOutcome out;
  out.config = cfg;
  auto wd = [&](NodeId x) { return well_defined(g, cfg, x); };
  auto gate = [](NodeId) { return true; };
  std::vector<Rule> rules;
  for (NodeId u : selected) {
    if (u < 0 || u >= cfg.n()) throw std::invalid_argument("apply_step: node out of range");
    detail::eligible_rules_impl(g, cfg, u, sem, wd, gate, rules);
    if (rules.empty())
      throw std::invalid_argument("apply_step: selected node " + std::to_string(u) +
                                  " has no eligible rule");
    StateWriter w(cfg.states[u]);
    for (Rule r : rules) detail::command_impl(g, cfg, u, r, w, sem);
    if (w.wrote_d() && w.result().d() != cfg.states[u].d()) out.d_changed = true;
    out.config.states[u] = w.result();
    out.actions.emplace_back(u, rules);
  }
  return out;
}

}  // namespace rsim
