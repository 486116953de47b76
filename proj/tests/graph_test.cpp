#include <catch2/catch_amalgamated.hpp>

#include "rsim/graph.hpp"
#include "rsim/json_io.hpp"

using namespace rsim;

namespace {

// Independent all-pairs oracle for small graphs.
std::vector<std::vector<int>> floyd_warshall(const Graph& g) {
  int const n = g.n();
  int const inf = 1 << 20;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (int u = 0; u < n; ++u) {
    d[u][u] = 0;
    for (NodeId v : g.neighbors(u)) d[u][v] = 1;
  }
  for (int m = 0; m < n; ++m)
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) d[u][v] = std::min(d[u][v], d[u][m] + d[m][v]);
  return d;
}

}  // namespace

TEST_CASE("bfs distances on small graphs") {
  auto p3 = make_path(3);
  auto d = bfs_distances(p3, {0});
  REQUIRE(d == std::vector<int>{0, 1, 2});

  // sources = all nodes -> all zeros
  auto all = bfs_distances(p3, {0, 1, 2});
  REQUIRE(all == std::vector<int>{0, 0, 0});

  auto c4 = make_cycle(4);
  REQUIRE(bfs_distances(c4, {0}) == std::vector<int>{0, 1, 2, 1});

  REQUIRE_THROWS_AS(bfs_distances(p3, {}), std::invalid_argument);
}

TEST_CASE("bfs agrees with Floyd-Warshall") {
  for (uint64_t seed : {1u, 2u, 3u, 4u}) {
    auto g = make_random_bounded_degree(25, 4, seed);
    auto fw = floyd_warshall(g);
    for (NodeId u = 0; u < g.n(); ++u) {
      auto d = bfs_from(g, u);
      for (NodeId v = 0; v < g.n(); ++v) REQUIRE(d[v] == fw[u][v]);
    }
  }
}

TEST_CASE("ball") {
  auto p4 = make_path(4);
  REQUIRE(ball(p4, 2, 0) == NodeSet{2});
  REQUIRE(ball(p4, 1, 1) == NodeSet{0, 1, 2});

  // star K_{1,4}: hub 0, leaves 1..4
  auto star = Graph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  REQUIRE(ball(star, 3, 1) == NodeSet{0, 3});

  // ball == nodes within bfs distance
  auto g = make_random_bounded_degree(30, 4, 9);
  for (int r : {0, 1, 2, 3}) {
    for (NodeId u = 0; u < g.n(); u += 7) {
      auto b = ball(g, u, r);
      auto d = bfs_from(g, u);
      NodeSet expect;
      for (NodeId v = 0; v < g.n(); ++v)
        if (d[v] <= r) expect.push_back(v);
      REQUIRE(b == expect);
    }
  }
}

TEST_CASE("generators") {
  auto p5 = make_path(5);
  REQUIRE(p5.edges() == std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}, {2, 3}, {3, 4}});

  auto c4 = make_cycle(4);
  REQUIRE(c4.edges() == std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {0, 3}, {1, 2}, {2, 3}});

  auto grid = make_grid(2, 3);
  REQUIRE(grid.n() == 6);
  REQUIRE(grid.edge_count() == 7);

  auto g = make_random_bounded_degree(50, 4, 7);
  REQUIRE(g.n() == 50);
  REQUIRE(g.max_degree() <= 4);
  // connectivity is enforced by construction; a second call is identical
  auto g2 = make_random_bounded_degree(50, 4, 7);
  REQUIRE(g == g2);
  auto g3 = make_random_bounded_degree(50, 4, 8);
  REQUIRE(!(g == g3));

  REQUIRE_THROWS_AS(make_cycle(2), std::invalid_argument);
  REQUIRE_THROWS_AS(make_random_bounded_degree(10, 1, 1), std::invalid_argument);
}

TEST_CASE("edge list round trip") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    auto g = make_random_bounded_degree(20 + 3 * static_cast<int>(seed), 4, seed);
    auto text = write_edge_list(g);
    auto back = parse_edge_list(text);
    REQUIRE(back == g);
  }
  auto p2 = parse_edge_list("# comment\n0 1\n");
  REQUIRE(p2.n() == 2);

  REQUIRE_THROWS_AS(parse_edge_list("0 1\n2 2\n"), std::invalid_argument);    // self-loop
  REQUIRE_THROWS_AS(parse_edge_list("0 1 2\n"), std::invalid_argument);       // malformed
  REQUIRE_THROWS_AS(parse_edge_list("0 x\n"), std::invalid_argument);         // malformed
  REQUIRE_THROWS_AS(parse_edge_list("0 1\n2 3\n"), std::invalid_argument);    // disconnected
  REQUIRE_THROWS_AS(parse_edge_list("# only comments\n"), std::invalid_argument);
}

TEST_CASE("graph json round trip") {
  auto g = make_random_bounded_degree(15, 3, 42);
  auto j = graph_to_json(g);
  auto back = graph_from_json(j);
  REQUIRE(back == g);

  auto single = graph_from_json(Json::parse(R"({"n":1,"edges":[]})"));
  REQUIRE(single.n() == 1);

  REQUIRE_THROWS_AS(graph_from_json(Json::parse(R"({"n":4,"edges":[[0,1]]})")),
                    std::invalid_argument);  // disconnected
}
