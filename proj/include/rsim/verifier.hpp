#pragma once

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "rsim/graph.hpp"
#include "rsim/protocol.hpp"

namespace rsim {

struct BudgetExceeded : std::runtime_error {
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

/// The verifier re-derives every check from the graph itself (BFS distances,
/// explicit pattern tables), never from the engine's shortcuts, so the two
/// sides cannot share a bug.
namespace verify {

inline NodeSet leaders(const Configuration& cfg) {
  NodeSet out;
  for (NodeId u = 0; u < cfg.n(); ++u)
    if (cfg.states[u].d() == 0) out.push_back(u);
  return out;
}

// --- predicate oracles -----------------------------------------------------

inline bool well_defined_at(const Graph& g, const Configuration& cfg, NodeId u) {
  const NodeState& s = cfg.states[u];
  if (s.err() != 0) return false;
  bool closer = false;
  for (NodeId v : g.neighbors(u)) {
    int const diff = s.d() - cfg.states[v].d();
    if (diff > 1 || diff < -1) return false;
    if (diff == 1) closer = true;
  }
  return s.d() == 0 || closer;
}

inline bool leader_down_at(const Graph&, const Configuration& cfg, NodeId u) {
  if (cfg.states[u].d() != 0) return true;
  for (int i = 1; i <= cfg.params.clock_count(); ++i)
    if (cfg.states[u].b(i) != Arrow::down) return false;
  return true;
}

namespace detail {

// Allowed (b_u, b_v, c_v - c_u mod 4) triples, transcribed as data.
struct Pattern {
  Arrow bu, bv;
  int dc;
};

inline bool matches(const Pattern* table, int count, Arrow bu, Arrow bv, int cu, int cv) {
  for (int t = 0; t < count; ++t) {
    const Pattern& p = table[t];
    if (p.bu == bu && p.bv == bv && (cu + p.dc) % 4 == cv) return true;
  }
  return false;
}

inline bool coherent_with_parent(Arrow bu, int cu, Arrow bv, int cv) {
  static const Pattern kUp[] = {{Arrow::up, Arrow::up, 0},
                                {Arrow::up, Arrow::down, 0},
                                {Arrow::up, Arrow::down, 1},
                                {Arrow::down, Arrow::down, 0}};
  return matches(kUp, 4, bu, bv, cu, cv);
}

inline bool coherent_with_child(Arrow bu, int cu, Arrow bv, int cv) {
  static const Pattern kDown[] = {{Arrow::up, Arrow::up, 0},
                                  {Arrow::down, Arrow::up, 0},
                                  {Arrow::down, Arrow::up, 3},
                                  {Arrow::down, Arrow::down, 0}};
  return matches(kDown, 4, bu, bv, cu, cv);
}

}  // namespace detail

inline bool branch_coherence_up_at(const Graph& g, const Configuration& cfg, NodeId u, int i) {
  const NodeState& s = cfg.states[u];
  for (NodeId v : g.neighbors(u)) {
    const NodeState& t = cfg.states[v];
    if (t.d() != s.d() - 1) continue;
    if (!detail::coherent_with_parent(s.b(i), s.c(i), t.b(i), t.c(i))) return false;
  }
  return true;
}

inline bool branch_coherence_down_at(const Graph& g, const Configuration& cfg, NodeId u, int i) {
  const NodeState& s = cfg.states[u];
  for (NodeId v : g.neighbors(u)) {
    const NodeState& t = cfg.states[v];
    if (t.d() != s.d() + 1) continue;
    if (!detail::coherent_with_child(s.b(i), s.c(i), t.b(i), t.c(i))) return false;
  }
  return true;
}

inline bool branch_coherence_at(const Graph& g, const Configuration& cfg, NodeId u) {
  int const du = cfg.states[u].d();
  if (du >= cfg.params.half()) return true;
  int const cc = cfg.params.clock_count();
  if (du >= 1 && du <= cc && !branch_coherence_up_at(g, cfg, u, du)) return false;
  for (int i = du + 1; i <= cc; ++i) {
    if (!branch_coherence_up_at(g, cfg, u, i)) return false;
    if (!branch_coherence_down_at(g, cfg, u, i)) return false;
  }
  return true;
}

// --- ruling sets and legitimacy ---------------------------------------------

/// BFS-checked (a,b)-ruling set: members pairwise at distance >= a, every
/// node within distance b of a member.
inline bool is_ruling_set(const Graph& g, const NodeSet& s, int a, int b) {
  if (s.empty()) return false;
  auto dist = bfs_distances(g, s);
  for (NodeId u = 0; u < g.n(); ++u)
    if (dist[u] > b) return false;
  for (NodeId u : s) {
    // truncated BFS: another member within a-1 hops breaks the spacing rule
    std::vector<int> d(g.n(), kUnreachable);
    std::queue<NodeId> q;
    d[u] = 0;
    q.push(u);
    while (!q.empty()) {
      NodeId x = q.front();
      q.pop();
      if (x != u && node_set_contains(s, x)) return false;
      if (d[x] == a - 1) continue;
      for (NodeId y : g.neighbors(x))
        if (d[y] == kUnreachable) {
          d[y] = d[x] + 1;
          q.push(y);
        }
    }
  }
  return true;
}

struct LegitimacyReport {
  bool legitimate = false;
  std::vector<std::pair<NodeId, std::string>> violations;
  std::vector<std::tuple<NodeId, NodeId, int>> leader_distance_violations;
};

/// Early-exit boolean form of the legitimacy check, for use inside run loops.
inline bool legitimate(const Graph& g, const Configuration& cfg) {
  for (NodeId u = 0; u < g.n(); ++u) {
    if (!well_defined_at(g, cfg, u)) return false;
    if (!leader_down_at(g, cfg, u)) return false;
    if (!branch_coherence_at(g, cfg, u)) return false;
  }
  auto ls = leaders(cfg);
  int const k = cfg.k();
  for (NodeId s : ls) {
    std::vector<int> d(g.n(), kUnreachable);
    std::queue<NodeId> q;
    d[s] = 0;
    q.push(s);
    while (!q.empty()) {
      NodeId x = q.front();
      q.pop();
      if (x != s && cfg.states[x].d() == 0) return false;
      if (d[x] == k - 1) continue;
      for (NodeId y : g.neighbors(x))
        if (d[y] == kUnreachable) {
          d[y] = d[x] + 1;
          q.push(y);
        }
    }
  }
  return true;
}

inline LegitimacyReport is_legitimate(const Graph& g, const Configuration& cfg) {
  LegitimacyReport report;
  for (NodeId u = 0; u < g.n(); ++u) {
    if (!well_defined_at(g, cfg, u)) report.violations.emplace_back(u, "well_defined");
    if (!leader_down_at(g, cfg, u)) report.violations.emplace_back(u, "leader_down");
    if (!branch_coherence_at(g, cfg, u)) report.violations.emplace_back(u, "branch_coherence");
  }
  auto ls = leaders(cfg);
  for (NodeId s : ls) {
    std::vector<int> d(g.n(), kUnreachable);
    std::queue<NodeId> q;
    d[s] = 0;
    q.push(s);
    while (!q.empty()) {
      NodeId x = q.front();
      q.pop();
      if (x != s && x > s && cfg.states[x].d() == 0)
        report.leader_distance_violations.emplace_back(s, x, d[x]);
      if (d[x] == cfg.k() - 1) continue;
      for (NodeId y : g.neighbors(x))
        if (d[y] == kUnreachable) {
          d[y] = d[x] + 1;
          q.push(y);
        }
    }
  }
  report.legitimate =
      report.violations.empty() && report.leader_distance_violations.empty();
  return report;
}

/// d_u == min(dist(u, S), k-1) everywhere; with no leader at all the capped
/// distance degenerates to k-1 for every node.
inline bool check_dist_consistency(const Graph& g, const Configuration& cfg) {
  auto ls = leaders(cfg);
  int const k = cfg.k();
  if (ls.empty()) {
    for (NodeId u = 0; u < g.n(); ++u)
      if (cfg.states[u].d() != k - 1) return false;
    return true;
  }
  auto dist = bfs_distances(g, ls);
  for (NodeId u = 0; u < g.n(); ++u)
    if (cfg.states[u].d() != std::min(dist[u], k - 1)) return false;
  return true;
}

/// Leaders whose radius-floor(k/2) ball looks legitimate and whose
/// radius-(k-1) ball carries sandwiched d-values.
inline bool is_locally_legitimate(const Graph& g, const Configuration& cfg, NodeId s) {
  if (cfg.states[s].d() != 0) return false;
  auto dist = bfs_from(g, s);
  int const k = cfg.k();
  int const half = cfg.params.half();
  for (NodeId u = 0; u < g.n(); ++u) {
    if (dist[u] <= half) {
      if (!well_defined_at(g, cfg, u) || !leader_down_at(g, cfg, u) ||
          !branch_coherence_at(g, cfg, u))
        return false;
      if (cfg.states[u].d() != dist[u]) return false;
    } else if (dist[u] <= k - 1) {
      int const du = cfg.states[u].d();
      if (du < k - dist[u] || du > dist[u]) return false;
    }
  }
  return true;
}

inline NodeSet locally_legitimate_set(const Graph& g, const Configuration& cfg) {
  NodeSet out;
  for (NodeId s : leaders(cfg))
    if (is_locally_legitimate(g, cfg, s)) out.push_back(s);
  return out;
}

/// Leaders in conflict: another leader lives closer than k.
inline NodeSet phi(const Graph& g, const Configuration& cfg) {
  auto ls = leaders(cfg);
  NodeSet out;
  if (ls.size() < 2) return out;
  for (NodeId s : ls) {
    std::vector<int> d(g.n(), kUnreachable);
    std::queue<NodeId> q;
    d[s] = 0;
    q.push(s);
    bool conflict = false;
    while (!q.empty() && !conflict) {
      NodeId x = q.front();
      q.pop();
      if (x != s && cfg.states[x].d() == 0) conflict = true;
      if (d[x] == cfg.k() - 1) continue;
      for (NodeId y : g.neighbors(x))
        if (d[y] == kUnreachable) {
          d[y] = d[x] + 1;
          q.push(y);
        }
    }
    if (conflict) out.push_back(s);
  }
  return out;
}

namespace detail {

/// Enumerates shortest paths from s to u backwards through the BFS DAG,
/// checking the two-segment clock structure on each.
class ClockPathChecker {
 public:
  ClockPathChecker(const Graph& g, const Configuration& cfg, NodeId s, size_t path_cap)
      : g_(g), cfg_(cfg), s_(s), cap_(path_cap), dist_(bfs_from(g, s)) {}

  bool check_all() {
    int const cc = cfg_.params.clock_count();
    for (NodeId u = 0; u < g_.n(); ++u) {
      if (dist_[u] == kUnreachable || dist_[u] > cc) continue;
      paths_seen_ = 0;
      path_.assign(static_cast<size_t>(dist_[u]) + 1, -1);
      if (!extend(u, dist_[u])) return false;
    }
    return true;
  }

 private:
  // walk predecessors; path_ is filled from the far end toward s
  bool extend(NodeId x, int depth) {
    path_[depth] = x;
    if (depth == 0) {
      if (++paths_seen_ > cap_) throw BudgetExceeded("check_clock_paths: too many shortest paths");
      return path_ok();
    }
    for (NodeId y : g_.neighbors(x)) {
      if (dist_[y] != depth - 1) continue;
      if (!extend(y, depth - 1)) return false;
    }
    return true;
  }

  bool path_ok() const {
    int const cc = cfg_.params.clock_count();
    int const m = static_cast<int>(path_.size()) - 1;
    const NodeState& root = cfg_.states[s_];
    for (int i = m + 1; i <= cc; ++i) {
      int const cs = root.c(i);
      // longest prefix pinned to (down, c_s); it is the only split candidate
      int a = -1;
      while (a + 1 <= m) {
        const NodeState& st = cfg_.states[path_[a + 1]];
        if (st.b(i) == Arrow::down && st.c(i) == cs)
          ++a;
        else
          break;
      }
      if (a < 0) return false;  // the leader itself must be (down, c_s)
      if (a == m) continue;
      int const suffix_c = cfg_.states[path_[a + 1]].c(i);
      if (suffix_c != cs && suffix_c != (cs + 3) % 4) return false;
      for (int l = a + 1; l <= m; ++l) {
        const NodeState& st = cfg_.states[path_[l]];
        if (st.b(i) != Arrow::up || st.c(i) != suffix_c) return false;
      }
    }
    return true;
  }

  const Graph& g_;
  const Configuration& cfg_;
  NodeId s_;
  size_t cap_;
  std::vector<int> dist_;
  std::vector<NodeId> path_;
  size_t paths_seen_ = 0;
};

}  // namespace detail

/// Every shortest path from leader s to each node within the clock horizon
/// splits into a (down, c_s) prefix and an (up, c') suffix with
/// c' in {c_s - 1, c_s}.
inline bool check_clock_paths(const Graph& g, const Configuration& cfg, NodeId s,
                              size_t path_cap = 10000) {
  return detail::ClockPathChecker(g, cfg, s, path_cap).check_all();
}

/// Scrambles m uniformly chosen nodes into uniformly random valid states.
inline Configuration inject_faults(const Configuration& cfg, int m, Rng& rng) {
  Configuration out = cfg;
  int const n = cfg.n();
  if (m <= 0) return out;
  std::vector<NodeId> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = i;
  rng.shuffle(ids);
  int const count = std::min(m, n);
  for (int i = 0; i < count; ++i) out.states[ids[i]] = random_node_state(cfg.params, rng);
  return out;
}

}  // namespace verify
}  // namespace rsim
