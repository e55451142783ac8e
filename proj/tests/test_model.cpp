#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fixtures.hpp"
#include "preempt/model.hpp"

using namespace preempt;
using fixtures::for_each_decision;
using fixtures::make_four_link_instance;
using fixtures::make_path_topology;

namespace {

DecisionMatrix fig1_sample_decision(const PreemptionInstance& inst) {
  // The worked realization: flow 0 preempted on its whole span, flow 1 on its
  // only link, everything else kept.
  DecisionMatrix d(inst);
  for (int i = 0; i <= 2; ++i) d.set(inst.flows[0], 0, i, 1);
  d.set(inst.flows[1], 1, 3, 1);
  return d;
}

}  // namespace

TEST_CASE("objective sums weighted preempted bandwidth") {
  const auto inst = make_four_link_instance();
  GlobalDecision none(5, 0);
  CHECK(objective(inst, none) == 0.0);

  GlobalDecision two = none;
  two[0] = two[1] = 1;
  CHECK(objective(inst, two) == 2.0);

  PreemptionInstance one;
  one.link_count = 1;
  one.free_bw = {0.0};
  one.new_call_bw = 5.0;
  one.new_call_class = 3;
  one.alpha = {{2, 2.0}};
  one.beta = 1.0;
  one.flows.push_back({0, 0, 2, 5.0, 0, 0});
  one.validate();
  CHECK(objective(one, {1}) == 10.0);
}

TEST_CASE("hamiltonian on the four-link fixture") {
  const auto inst = make_four_link_instance();

  DecisionMatrix zero(inst);
  // every link infeasible when nothing is preempted and free bandwidth is 0
  CHECK(hamiltonian(inst, zero) == 4 * inst.beta);

  auto relaxed = inst;
  relaxed.free_bw = {1.0, 1.0, 1.0, 1.0};
  CHECK(hamiltonian(relaxed, DecisionMatrix(relaxed)) == 0.0);

  auto three_short = inst;
  three_short.free_bw = {0.0, 1.0, 0.0, 0.0};
  CHECK(hamiltonian(three_short, DecisionMatrix(three_short)) == 3 * inst.beta);

  const DecisionMatrix sample = fig1_sample_decision(inst);
  CHECK(hamiltonian(inst, sample) == 2.0);
  CHECK(feasible(inst, sample));
}

TEST_CASE("expanded inclusion-exclusion matches the product form") {
  const auto inst = make_four_link_instance();
  for_each_decision(inst, [&](const DecisionMatrix& d) {
    CHECK(hamiltonian(inst, d) == Catch::Approx(hamiltonian_expanded(inst, d)).margin(1e-9));
  });
}

TEST_CASE("expanded form on single- and three-link flows") {
  PreemptionInstance inst;
  inst.link_count = 3;
  inst.free_bw = {10.0, 10.0, 10.0};
  inst.new_call_bw = 1.0;
  inst.new_call_class = 2;
  inst.alpha = {{1, 1.5}};
  inst.beta = 50.0;
  inst.flows.push_back({0, 0, 1, 2.0, 1, 1});  // single link
  inst.flows.push_back({1, 1, 1, 4.0, 0, 2});  // three links
  inst.validate();

  for_each_decision(inst, [&](const DecisionMatrix& d) {
    CHECK(hamiltonian_expanded(inst, d) == Catch::Approx(hamiltonian(inst, d)).margin(1e-9));
  });

  DecisionMatrix d(inst);
  d.set(inst.flows[0], 0, 1, 1);
  CHECK(hamiltonian_expanded(inst, d) == Catch::Approx(1.5 * 2.0).margin(1e-12));
}

TEST_CASE("expanded form refuses oversized spans") {
  PreemptionInstance inst;
  inst.link_count = 25;
  inst.free_bw.assign(25, 100.0);
  inst.new_call_bw = 1.0;
  inst.new_call_class = 2;
  inst.alpha = {{1, 1.0}};
  inst.beta = 1.0;
  inst.flows.push_back({0, 0, 1, 1.0, 0, 24});
  inst.validate();
  CHECK_THROWS_AS(hamiltonian_expanded(inst, DecisionMatrix(inst)), std::invalid_argument);
}

TEST_CASE("random instances: expanded form is an exact oracle") {
  auto rng = make_rng(42);
  for (int round = 0; round < 25; ++round) {
    const auto inst = fixtures::make_random_instance(rng, 4, 4, 0.4);
    if (inst.incidence_count() > 12) continue;
    for_each_decision(inst, [&](const DecisionMatrix& d) {
      REQUIRE(hamiltonian(inst, d) == Catch::Approx(hamiltonian_expanded(inst, d)).margin(1e-9));
    });
  }
}

TEST_CASE("truncated energy: exact for spans of at most two links") {
  PreemptionInstance inst;
  inst.link_count = 4;
  inst.free_bw = {5.0, 0.0, 3.0, 8.0};
  inst.new_call_bw = 6.0;
  inst.new_call_class = 2;
  inst.alpha = {{1, 1.0}};
  inst.beta = 30.0;
  inst.flows.push_back({0, 0, 1, 7.0, 0, 1});
  inst.flows.push_back({1, 1, 1, 3.0, 1, 2});
  inst.flows.push_back({2, 2, 1, 9.0, 3, 3});
  inst.validate();

  for_each_decision(inst, [&](const DecisionMatrix& d) {
    REQUIRE(local_hamiltonian(inst, d, inst.link_count) ==
            Catch::Approx(hamiltonian(inst, d)).margin(1e-9));
  });
}

TEST_CASE("truncated energy drops higher-order consistency credit") {
  // One flow over three links, all preempted: first-order 3, pairwise -3, so
  // the flow term collapses to 0 while the exact energy charges 1.
  PreemptionInstance inst;
  inst.link_count = 3;
  inst.free_bw = {1.0, 1.0, 1.0};
  inst.new_call_bw = 1.0;
  inst.new_call_class = 2;
  inst.alpha = {{1, 1.0}};
  inst.beta = 100.0;
  inst.flows.push_back({0, 0, 1, 1.0, 0, 2});
  inst.validate();

  DecisionMatrix d(inst);
  for (int i = 0; i < 3; ++i) d.set(inst.flows[0], 0, i, 1);
  CHECK(local_hamiltonian(inst, d, 2) == Catch::Approx(0.0).margin(1e-12));
  CHECK(hamiltonian(inst, d) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("truncated energy with no decisions equals the penalty term") {
  const auto inst = make_four_link_instance();
  CHECK(local_hamiltonian(inst, DecisionMatrix(inst), 1) == 4 * inst.beta);
}

TEST_CASE("feasibility checks") {
  auto inst = make_four_link_instance();
  DecisionMatrix zero(inst);
  CHECK_FALSE(feasible(inst, zero));

  auto rich = inst;
  rich.free_bw = {2.0, 2.0, 2.0, 2.0};
  CHECK(feasible(rich, DecisionMatrix(rich)));

  CHECK(feasible(inst, fig1_sample_decision(inst)));
}

TEST_CASE("consistency per flow") {
  const auto inst = make_four_link_instance();
  DecisionMatrix d(inst);
  auto all = consistency(inst, d);
  for (bool ok : all) CHECK(ok);

  d.set(inst.flows[0], 0, 0, 1);
  d.set(inst.flows[0], 0, 2, 1);  // (1, 0, 1) over the span
  CHECK_FALSE(consistency(inst, d)[0]);

  const auto sample = fig1_sample_decision(inst);
  for (bool ok : consistency(inst, sample)) CHECK(ok);
}

TEST_CASE("consistent feasible decisions reduce the energy to the objective") {
  auto rng = make_rng(17);
  for (int round = 0; round < 40; ++round) {
    const auto inst = fixtures::make_random_instance(rng, 5, 6, 0.35, 8, 12, 10, 25);
    GlobalDecision g(inst.flows.size(), 0);
    for (size_t k = 0; k < g.size(); ++k) g[k] = chance(rng, 0.5) ? 1 : 0;
    const DecisionMatrix d = propagate(inst, g);
    if (!feasible(inst, d)) continue;
    CHECK(hamiltonian(inst, d) == Catch::Approx(objective(inst, g)).margin(1e-9));
  }
}

TEST_CASE("energy is invariant under flow relabeling and route reversal") {
  auto rng = make_rng(23);
  for (int round = 0; round < 20; ++round) {
    const auto inst = fixtures::make_random_instance(rng, 5, 5, 0.4);
    auto reversed = inst;
    const int L = inst.link_count;
    for (size_t k = 0; k < reversed.flows.size(); ++k) {
      reversed.flows[k].span_lo = L - 1 - inst.flows[k].span_hi;
      reversed.flows[k].span_hi = L - 1 - inst.flows[k].span_lo;
    }
    std::reverse(reversed.flows.begin(), reversed.flows.end());
    std::reverse(reversed.free_bw.begin(), reversed.free_bw.end());
    for (size_t k = 0; k < reversed.flows.size(); ++k)
      reversed.flows[k].id = static_cast<int>(k);

    for_each_decision(inst, [&](const DecisionMatrix& d) {
      DecisionMatrix rd(reversed);
      const size_t n = inst.flows.size();
      for (size_t k = 0; k < n; ++k) {
        const auto& orig = inst.flows[k];
        const auto& mirrored = reversed.flows[n - 1 - k];
        for (int i = orig.span_lo; i <= orig.span_hi; ++i)
          rd.set(mirrored, static_cast<int>(n - 1 - k), L - 1 - i,
                 d.get(orig, static_cast<int>(k), i));
      }
      REQUIRE(hamiltonian(inst, d) == Catch::Approx(hamiltonian(reversed, rd)).margin(1e-9));
    });
    if (inst.incidence_count() > 10) break;  // keep the exhaustive loops small
  }
}

TEST_CASE("raising beta never lowers the energy of an infeasible decision") {
  const auto inst = make_four_link_instance(50.0);
  auto stiffer = inst;
  stiffer.beta = 500.0;
  for_each_decision(inst, [&](const DecisionMatrix& d) {
    const double h1 = hamiltonian(inst, d);
    const double h2 = hamiltonian(stiffer, d);
    REQUIRE(h2 >= h1 - 1e-12);
  });
}

TEST_CASE("default beta doubles the all-preempted cost") {
  const auto inst = make_four_link_instance();
  CHECK(default_beta(inst) == Catch::Approx(2.0 * 5.0));
}

TEST_CASE("extract_instance reproduces the four-link fixture") {
  // Path of 5 nodes; capacities chosen so every link is exactly full.
  const Topology t = make_path_topology(5, 2.0);
  const Route route = shortest_path(t, 0, 4);
  REQUIRE(route.hops() == 4);

  std::vector<Flow> flows;
  auto add = [&](int from, int to) {
    Flow f;
    f.id = static_cast<int>(flows.size());
    f.priority_class = 1;
    f.bandwidth = 1.0;
    f.path = shortest_path(t, from, to);
    flows.push_back(f);
  };
  add(0, 3);  // spans links 0..2
  add(3, 4);  // link 3
  add(0, 1);  // link 0
  add(1, 2);  // link 1
  add(2, 4);  // links 2..3

  const auto inst = extract_instance(t, flows, route, 1.0, 2, {{1, 1.0}, {2, 2.0}});
  REQUIRE(inst.flows.size() == 5);
  CHECK(inst.flows[0].span_lo == 0);
  CHECK(inst.flows[0].span_hi == 2);
  CHECK(inst.flows[1].span_lo == 3);
  CHECK(inst.flows[1].span_hi == 3);
  CHECK(inst.flows[2].span_lo == 0);
  CHECK(inst.flows[2].span_hi == 0);
  CHECK(inst.flows[3].span_lo == 1);
  CHECK(inst.flows[3].span_hi == 1);
  CHECK(inst.flows[4].span_lo == 2);
  CHECK(inst.flows[4].span_hi == 3);
  for (double b : inst.free_bw) CHECK(b == 0.0);
}

TEST_CASE("extract_instance keeps only strictly lower classes and route overlaps") {
  const Topology t = make_path_topology(6, 10.0);
  const Route route = shortest_path(t, 1, 4);  // links 1..3

  std::vector<Flow> flows;
  Flow same_class;
  same_class.id = 0;
  same_class.priority_class = 2;
  same_class.bandwidth = 3.0;
  same_class.path = shortest_path(t, 1, 3);
  flows.push_back(same_class);

  Flow off_route;
  off_route.id = 1;
  off_route.priority_class = 1;
  off_route.bandwidth = 2.0;
  off_route.path = shortest_path(t, 4, 5);
  flows.push_back(off_route);

  Flow on_route;
  on_route.id = 2;
  on_route.priority_class = 1;
  on_route.bandwidth = 2.0;
  on_route.path = shortest_path(t, 2, 4);
  flows.push_back(on_route);

  const auto inst = extract_instance(t, flows, route, 5.0, 2, {{1, 1.0}, {2, 2.0}});
  REQUIRE(inst.flows.size() == 1);
  CHECK(inst.flows[0].source_id == 2);
  // class-2 flow still consumes capacity on links 1 and 2 of the route
  CHECK(inst.free_bw[0] == Catch::Approx(7.0));
  CHECK(inst.free_bw[1] == Catch::Approx(5.0));
  CHECK(inst.free_bw[2] == Catch::Approx(8.0));
}

TEST_CASE("extract_instance splits disjoint overlaps into pieces") {
  // Route runs along the line 0-1-2-3-4; a detour node lets a flow leave the
  // route after link 0 and rejoin for link 3.
  std::vector<Edge> edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 5}, {5, 3}};
  const Topology t(6, std::move(edges), std::vector<double>(6, 10.0));
  Route route;
  route.nodes = {0, 1, 2, 3, 4};
  for (size_t i = 0; i + 1 < route.nodes.size(); ++i)
    route.links.push_back(t.edge_between(route.nodes[i], route.nodes[i + 1]));

  Flow detour;
  detour.id = 7;
  detour.priority_class = 1;
  detour.bandwidth = 2.5;
  detour.path.nodes = {0, 1, 5, 3, 4};
  for (size_t i = 0; i + 1 < detour.path.nodes.size(); ++i)
    detour.path.links.push_back(t.edge_between(detour.path.nodes[i], detour.path.nodes[i + 1]));

  const auto inst = extract_instance(t, {detour}, route, 1.0, 2, {{1, 1.0}, {2, 2.0}});
  REQUIRE(inst.flows.size() == 2);
  CHECK(inst.flows[0].source_id == 7);
  CHECK(inst.flows[1].source_id == 7);
  CHECK(inst.flows[0].span_lo == 0);
  CHECK(inst.flows[0].span_hi == 0);
  CHECK(inst.flows[1].span_lo == 3);
  CHECK(inst.flows[1].span_hi == 3);
}

TEST_CASE("instance JSON round-trip") {
  const auto inst = make_four_link_instance();
  const auto back = instance_from_json(to_json(inst));
  CHECK(back.link_count == inst.link_count);
  REQUIRE(back.flows.size() == inst.flows.size());
  for (size_t k = 0; k < inst.flows.size(); ++k) {
    CHECK(back.flows[k].id == inst.flows[k].id);
    CHECK(back.flows[k].priority_class == inst.flows[k].priority_class);
    CHECK(back.flows[k].bandwidth == inst.flows[k].bandwidth);
    CHECK(back.flows[k].span_lo == inst.flows[k].span_lo);
    CHECK(back.flows[k].span_hi == inst.flows[k].span_hi);
  }
  CHECK(back.free_bw == inst.free_bw);
  CHECK(back.new_call_bw == inst.new_call_bw);
  CHECK(back.new_call_class == inst.new_call_class);
  CHECK(back.alpha == inst.alpha);
  CHECK(back.beta == inst.beta);
}
