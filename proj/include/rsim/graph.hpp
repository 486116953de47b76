#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsim/hash.hpp"
#include "rsim/rng.hpp"

namespace rsim {

/// Node handles are dense integers 0..n-1, assigned at construction time.
/// They are simulator bookkeeping only: protocol guards never read them as
/// identifiers, which is what keeps the simulated network anonymous.
using NodeId = int32_t;

/// Sorted, duplicate-free set of node handles.
using NodeSet = std::vector<NodeId>;

inline NodeSet make_node_set(std::vector<NodeId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline bool node_set_contains(const NodeSet& s, NodeId u) {
  return std::binary_search(s.begin(), s.end(), u);
}

constexpr int kUnreachable = -1;

/// Undirected simple connected graph. Immutable after construction; safe to
/// share across threads.
class Graph {
 public:
  Graph() = default;

  /// Builds from an edge list. Rejects self-loops, out-of-range endpoints
  /// and (unless `allow_disconnected` is set by tests) disconnected input:
  /// the protocol's guarantees are per connected component, so keeping every
  /// instance connected keeps whole-configuration checks unambiguous.
  static Graph from_edges(int n, const std::vector<std::pair<NodeId, NodeId>>& edges) {
    if (n < 1) throw std::invalid_argument("graph: need at least one node");
    Graph g;
    g.adj_.assign(n, {});
    for (auto [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n || v >= n) throw std::invalid_argument("graph: endpoint out of range");
      if (u == v) throw std::invalid_argument("graph: self-loop rejected");
      g.adj_[u].push_back(v);
      g.adj_[v].push_back(u);
    }
    for (auto& nbrs : g.adj_) {
      std::sort(nbrs.begin(), nbrs.end());
      nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    if (!g.connected()) throw std::invalid_argument("graph: disconnected input rejected");
    return g;
  }

  int n() const { return static_cast<int>(adj_.size()); }

  const std::vector<NodeId>& neighbors(NodeId u) const { return adj_[u]; }

  int degree(NodeId u) const { return static_cast<int>(adj_[u].size()); }

  int max_degree() const {
    int d = 0;
    for (NodeId u = 0; u < n(); ++u) d = std::max(d, degree(u));
    return d;
  }

  size_t edge_count() const {
    size_t m = 0;
    for (const auto& nbrs : adj_) m += nbrs.size();
    return m / 2;
  }

  bool has_edge(NodeId u, NodeId v) const {
    return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
  }

  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    for (NodeId u = 0; u < n(); ++u)
      for (NodeId v : adj_[u])
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  uint64_t hash() const {
    Fnv1a h;
    h.i32(n());
    for (auto [u, v] : edges()) h.i32(u).i32(v);
    return h.value();
  }

  bool operator==(const Graph& other) const { return adj_ == other.adj_; }

 private:
  bool connected() const {
    if (adj_.empty()) return false;
    std::vector<char> seen(adj_.size(), 0);
    std::queue<NodeId> q;
    q.push(0);
    seen[0] = 1;
    size_t count = 1;
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop();
      for (NodeId v : adj_[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          q.push(v);
        }
      }
    }
    return count == adj_.size();
  }

  std::vector<std::vector<NodeId>> adj_;
};

/// Exact hop distances from the nearest source; kUnreachable never occurs on
/// connected graphs but is kept for robustness of partial queries.
inline std::vector<int> bfs_distances(const Graph& g, const NodeSet& sources) {
  if (sources.empty()) throw std::invalid_argument("bfs_distances: sources must be nonempty");
  std::vector<int> dist(g.n(), kUnreachable);
  std::queue<NodeId> q;
  for (NodeId s : sources) {
    if (dist[s] == kUnreachable) {
      dist[s] = 0;
      q.push(s);
    }
  }
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop();
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
    }
  }
  return dist;
}

inline std::vector<int> bfs_from(const Graph& g, NodeId source) {
  return bfs_distances(g, NodeSet{source});
}

/// All nodes at hop distance <= radius from center.
inline NodeSet ball(const Graph& g, NodeId center, int radius) {
  if (radius < 0) throw std::invalid_argument("ball: radius must be >= 0");
  NodeSet out;
  std::vector<int> dist(g.n(), kUnreachable);
  std::queue<NodeId> q;
  dist[center] = 0;
  q.push(center);
  out.push_back(center);
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop();
    if (dist[u] == radius) continue;
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        out.push_back(v);
        q.push(v);
      }
    }
  }
  return make_node_set(std::move(out));
}

/// Smallest hop distance between u and any member of s.
inline int dist_to_set(const Graph& g, NodeId u, const NodeSet& s) {
  if (s.empty()) return kUnreachable;
  auto dist = bfs_distances(g, s);
  return dist[u];
}

// ---------------------------------------------------------------------------
// Generators. Deterministic for (kind, params, seed).

inline Graph make_path(int n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph::from_edges(n, e);
}

inline Graph make_cycle(int n) {
  if (n < 3) throw std::invalid_argument("cycle: need n >= 3");
  std::vector<std::pair<NodeId, NodeId>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Graph::from_edges(n, e);
}

inline Graph make_grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid: need positive dimensions");
  std::vector<std::pair<NodeId, NodeId>> e;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) e.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) e.emplace_back(id(r, c), id(r + 1, c));
    }
  }
  return Graph::from_edges(rows * cols, e);
}

/// Random connected graph with maximum degree <= max_degree. A random
/// degree-bounded spanning tree guarantees connectivity, then extra edges are
/// sprinkled in while the degree bound allows it.
inline Graph make_random_bounded_degree(int n, int max_degree, uint64_t seed,
                                        double extra_edge_factor = 0.5) {
  if (n < 1) throw std::invalid_argument("random graph: need n >= 1");
  if (n > 1 && max_degree < 2) throw std::invalid_argument("random graph: need max degree >= 2");
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<NodeId> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<int> deg(n, 0);
  std::vector<std::pair<NodeId, NodeId>> edges;
  auto add_edge = [&](NodeId a, NodeId b) {
    edges.emplace_back(a, b);
    ++deg[a];
    ++deg[b];
  };
  for (int i = 1; i < n; ++i) {
    // attach to a random earlier node that still has degree budget
    std::vector<NodeId> candidates;
    for (int j = 0; j < i; ++j)
      if (deg[order[j]] < max_degree) candidates.push_back(order[j]);
    add_edge(order[i], candidates[rng.below(candidates.size())]);
  }
  auto extra = static_cast<size_t>(extra_edge_factor * n);
  for (size_t t = 0, attempts = 0; t < extra && attempts < 20 * extra + 100; ++attempts) {
    NodeId a = rng.below_int(n);
    NodeId b = rng.below_int(n);
    if (a == b || deg[a] >= max_degree || deg[b] >= max_degree) continue;
    bool dup = false;
    for (auto [x, y] : edges)
      if ((x == a && y == b) || (x == b && y == a)) dup = true;
    if (dup) continue;
    add_edge(a, b);
    ++t;
  }
  return Graph::from_edges(n, edges);
}

struct GenParams {
  std::string kind;  // path | cycle | grid | random
  int n = 0;
  int rows = 0, cols = 0;
  int max_degree = 4;
  uint64_t seed = 0;
};

inline Graph generate(const GenParams& p) {
  if (p.kind == "path") return make_path(p.n);
  if (p.kind == "cycle") return make_cycle(p.n);
  if (p.kind == "grid") return make_grid(p.rows, p.cols);
  if (p.kind == "random" || p.kind == "random_bounded_degree")
    return make_random_bounded_degree(p.n, p.max_degree, p.seed);
  throw std::invalid_argument("generate: unknown kind '" + p.kind + "'");
}

// ---------------------------------------------------------------------------
// Edge-list text format: one "u v" pair of decimal integers per line,
// comments start with '#'. Canonical writer emits u < v sorted.

inline Graph parse_edge_list(const std::string& text) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  NodeId max_node = -1;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    std::istringstream ls(line);
    long long u, v;
    if (!(ls >> u)) continue;  // blank or comment-only line
    std::string trailing;
    if (!(ls >> v) || (ls >> trailing)) {
      throw std::invalid_argument("edge list: malformed line " + std::to_string(lineno));
    }
    if (u < 0 || v < 0) throw std::invalid_argument("edge list: negative handle on line " + std::to_string(lineno));
    if (u == v) throw std::invalid_argument("edge list: self-loop on line " + std::to_string(lineno));
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    max_node = std::max(max_node, static_cast<NodeId>(std::max(u, v)));
  }
  if (edges.empty()) throw std::invalid_argument("edge list: no edges");
  return Graph::from_edges(max_node + 1, edges);
}

inline std::string write_edge_list(const Graph& g) {
  std::ostringstream out;
  for (auto [u, v] : g.edges()) out << u << " " << v << "\n";
  return out.str();
}

}  // namespace rsim
