#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "preempt/graph.hpp"

using namespace preempt;

namespace {

int manhattan(int rows, int cols, NodeId a, NodeId b) {
  (void)rows;
  int ra = a / cols, ca = a % cols;
  int rb = b / cols, cb = b % cols;
  return std::abs(ra - rb) + std::abs(ca - cb);
}

}  // namespace

TEST_CASE("lattice dimensions and degrees") {
  const Topology t = build_lattice(10, 10, 100.0);
  CHECK(t.node_count() == 100);
  CHECK(t.edges().size() == 180);
  // interior nodes have degree exactly 4
  for (int r = 1; r < 9; ++r)
    for (int c = 1; c < 9; ++c) CHECK(t.degree(r * 10 + c) == 4);
  CHECK(t.connected());
}

TEST_CASE("smallest lattice is a 4-cycle") {
  const Topology t = build_lattice(2, 2, 100.0);
  CHECK(t.node_count() == 4);
  CHECK(t.edges().size() == 4);
  for (int n = 0; n < 4; ++n) CHECK(t.degree(n) == 2);
}

TEST_CASE("3x3 lattice by hand enumeration") {
  const Topology t = build_lattice(3, 3, 50.0);
  CHECK(t.node_count() == 9);
  CHECK(t.edges().size() == 12);
  CHECK(t.degree(4) == 4);  // center
  for (size_t e = 0; e < t.edges().size(); ++e) CHECK(t.capacity(static_cast<int>(e)) == 50.0);
}

TEST_CASE("lattice rejects degenerate dimensions") {
  CHECK_THROWS_AS(build_lattice(1, 5, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(build_lattice(5, 1, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(build_lattice(3, 3, 0.0), std::invalid_argument);
}

TEST_CASE("power-law generator: size, determinism, connectivity") {
  const Topology a = build_power_law(80, 2, 7);
  CHECK(a.node_count() == 80);
  CHECK(a.edges().size() == 2 * (80 - 3) + 3);
  CHECK(a.connected());

  const Topology b = build_power_law(80, 2, 7);
  REQUIRE(a.edges().size() == b.edges().size());
  for (size_t e = 0; e < a.edges().size(); ++e) CHECK(a.edges()[e] == b.edges()[e]);

  const Topology c = build_power_law(3, 2, 11);
  CHECK(c.node_count() == 3);
  CHECK(c.edges().size() == 3);  // triangle seed

  CHECK_THROWS_AS(build_power_law(2, 2, 1), std::invalid_argument);
}

TEST_CASE("power-law connectivity across seeds") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    CHECK(build_power_law(60, 1, seed).connected());
    CHECK(build_power_law(60, 3, seed).connected());
  }
}

TEST_CASE("shortest path: hop counts match Manhattan distance on lattices") {
  const Topology t = build_lattice(10, 10, 100.0);
  const Route corner = shortest_path(t, 0, 99);
  CHECK(corner.hops() == 18);

  auto rng = make_rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    NodeId s = static_cast<NodeId>(uniform_index(rng, 100));
    NodeId d = static_cast<NodeId>(uniform_index(rng, 100));
    if (s == d) continue;
    CHECK(shortest_path(t, s, d).hops() == manhattan(10, 10, s, d));
  }
}

TEST_CASE("shortest path basics: adjacency, determinism, validity") {
  const Topology t = build_lattice(4, 4, 10.0);
  CHECK(shortest_path(t, 0, 1).hops() == 1);

  const Route r1 = shortest_path(t, 0, 15);
  const Route r2 = shortest_path(t, 0, 15);
  CHECK(r1.nodes == r2.nodes);

  // simple path: consecutive nodes adjacent, no repeats
  std::set<NodeId> seen(r1.nodes.begin(), r1.nodes.end());
  CHECK(seen.size() == r1.nodes.size());
  for (size_t i = 0; i + 1 < r1.nodes.size(); ++i)
    CHECK(t.edge_between(r1.nodes[i], r1.nodes[i + 1]) == r1.links[i]);

  CHECK_THROWS_AS(shortest_path(t, 3, 3), std::invalid_argument);
}

TEST_CASE("count_shortest_paths on grids") {
  const Topology t = build_lattice(5, 5, 10.0);
  // 1 horizontal + 1 vertical step: two staircase orders
  CHECK(count_shortest_paths(t, 0, 6) == 2);
  // straight line is unique
  CHECK(count_shortest_paths(t, 0, 4) == 1);
  CHECK(count_shortest_paths(t, 0, 20) == 1);
  // 2 horizontal + 2 vertical steps: C(4,2) = 6
  CHECK(count_shortest_paths(t, 0, 12) == 6);
}

TEST_CASE("count_shortest_paths equals C(a+b, a) away from boundaries") {
  const Topology t = build_lattice(9, 9, 10.0);
  auto node = [](int r, int c) { return r * 9 + c; };
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; b <= 4; ++b) {
      if (a + b == 0) continue;
      double expect = 1.0;
      for (int i = 0; i < a; ++i) expect = expect * (a + b - i) / (i + 1);
      CHECK(count_shortest_paths(t, node(0, 0), node(a, b)) ==
            static_cast<std::uint64_t>(expect + 0.5));
    }
}

TEST_CASE("sampled shortest paths are valid minimum-hop paths") {
  const Topology t = build_lattice(6, 6, 10.0);
  auto rng = make_rng(9);
  ShortestPathSampler sampler(t);
  for (int trial = 0; trial < 100; ++trial) {
    NodeId s = static_cast<NodeId>(uniform_index(rng, 36));
    NodeId d = static_cast<NodeId>(uniform_index(rng, 36));
    if (s == d) continue;
    const Route r = sampler.sample(s, d, rng);
    CHECK(r.hops() == manhattan(6, 6, s, d));
    CHECK(r.nodes.front() == s);
    CHECK(r.nodes.back() == d);
    for (size_t i = 0; i + 1 < r.nodes.size(); ++i)
      CHECK(t.edge_between(r.nodes[i], r.nodes[i + 1]) == r.links[i]);
  }
}

TEST_CASE("sampled shortest paths cover distinct alternatives") {
  const Topology t = build_lattice(4, 4, 10.0);
  auto rng = make_rng(1);
  std::set<std::vector<NodeId>> variants;
  for (int trial = 0; trial < 200; ++trial)
    variants.insert(sample_shortest_path(t, 0, 5, rng).nodes);
  CHECK(variants.size() == 2);  // exactly the two staircases
}

TEST_CASE("disconnected pairs raise a no-route error") {
  // two separate segments: 0-1 and 2-3
  const Topology t(4, {{0, 1}, {2, 3}}, {10.0, 10.0});
  CHECK_FALSE(t.connected());
  CHECK_THROWS_AS(shortest_path(t, 0, 3), std::runtime_error);
  CHECK(count_shortest_paths(t, 0, 3) == 0);
}

TEST_CASE("topology JSON round-trip") {
  const Topology t = build_lattice(3, 4, 25.0);
  const Topology back = topology_from_json(to_json(t));
  CHECK(back.node_count() == t.node_count());
  REQUIRE(back.edges().size() == t.edges().size());
  for (size_t e = 0; e < t.edges().size(); ++e) {
    CHECK(back.edges()[e] == t.edges()[e]);
    CHECK(back.capacity(static_cast<int>(e)) == t.capacity(static_cast<int>(e)));
  }
  CHECK(back.kind() == TopologyKind::lattice);
  CHECK(back.lattice_rows == 3);
  CHECK(back.lattice_cols == 4);
}
