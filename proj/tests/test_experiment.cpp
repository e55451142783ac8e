#include <catch2/catch_amalgamated.hpp>

#include "preempt/experiment.hpp"

using namespace preempt;

TEST_CASE("minimal config picks up the reference defaults") {
  const auto cfg = parse_config(nlohmann::json{{"experiment", "table2_lattice"}});
  CHECK(cfg.t0 == 3.0);
  CHECK(cfg.max_sweeps == 2500);  // table reproductions anneal longer
  CHECK(parse_config(nlohmann::json{{"experiment", "fig4_nd_pc_sweep"}}).max_sweeps == 500);
  CHECK(cfg.capacity == 100.0);
  CHECK(cfg.c_new == 20.0);
  CHECK(cfg.i_new == 2);
  CHECK(cfg.runs == 10);
  CHECK(cfg.class_bandwidth.at(1).first == 1.25);
  CHECK(cfg.class_bandwidth.at(2).second == 37.5);
}

TEST_CASE("per-kind grid defaults") {
  const auto fig4 = parse_config(nlohmann::json{{"experiment", "fig4_nd_pc_sweep"}});
  CHECK(fig4.nd_list == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(fig4.pc_list == std::vector<double>{0.3, 0.4, 0.5});

  const auto fig6 = parse_config(nlohmann::json{{"experiment", "fig6_demand_sweep"}});
  CHECK(fig6.cnew_list == std::vector<double>{10.0, 20.0, 30.0, 40.0});

  const auto t3 = parse_config(nlohmann::json{{"experiment", "table3_powerlaw"}});
  CHECK(t3.pl_edges == 1);
  CHECK(t3.rejection_streak == 1000);
}

TEST_CASE("config validation failures") {
  CHECK_THROWS_AS(parse_config(nlohmann::json{{"experiment", "table2_lattice"}, {"runs", 0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(nlohmann::json{{"experiment", "nope"}}), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(nlohmann::json{{"experiment", "table2_lattice"}, {"bogus", 1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(nlohmann::json::array()), std::invalid_argument);
  CHECK_THROWS_AS(
      parse_config(nlohmann::json{{"experiment", "table2_lattice"}, {"nd_list", nlohmann::json::array()}}),
      std::invalid_argument);
}

TEST_CASE("config survives a serialization round-trip") {
  auto cfg = parse_config(nlohmann::json{{"experiment", "fig6_demand_sweep"},
                                         {"runs", 4},
                                         {"seed", 77},
                                         {"flows_per_link", 5.5}});
  const auto back = parse_config(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
}

TEST_CASE("experiment output is deterministic per seed") {
  nlohmann::json j{{"experiment", "fig4_nd_pc_sweep"},
                   {"runs", 2},
                   {"seed", 5},
                   {"nd_list", {0, 1}},
                   {"pc_list", {0.3}},
                   {"max_sweeps", 60},
                   {"flows_per_link", 3.0}};
  const auto cfg = parse_config(j);
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  CHECK(write_csv(a) == write_csv(b));
  CHECK(!a.rows.empty());
}

TEST_CASE("route sweeps emit one row per parameter point and solver") {
  nlohmann::json j{{"experiment", "fig6_demand_sweep"},
                   {"runs", 1},
                   {"seed", 3},
                   {"nd_list", {1}},
                   {"pc_list", {0.4}},
                   {"cnew_list", {10.0, 20.0}},
                   {"max_sweeps", 40},
                   {"flows_per_link", 4.0}};
  const auto r = run_experiment(parse_config(j));
  CHECK(r.rows.size() == 4);  // 2 demands x (min_conn + gibbs_nd1)
  for (const auto& row : r.rows) REQUIRE(row.size() == r.columns.size());
}

TEST_CASE("small lattice table runs end to end") {
  nlohmann::json j{{"experiment", "table2_lattice"},
                   {"runs", 2},
                   {"seed", 11},
                   {"rows", 6},
                   {"cols", 6},
                   {"route_hops_min", 4},
                   {"route_hops_max", 8},
                   {"nd_list", {1}},
                   {"max_sweeps", 80}};
  const auto r = run_experiment(parse_config(j));
  REQUIRE(r.rows.size() == 2);  // min_conn + gibbs_nd1
  // columns: solver name and mean preempted bandwidth are in place
  CHECK(r.rows[0][6] == "min_conn");
  CHECK(r.rows[1][6] == "gibbs_nd1");
  const double decentralized = std::stod(r.rows[0][8]);
  const double distributed = std::stod(r.rows[1][8]);
  CHECK(decentralized > 0.0);
  CHECK(distributed > 0.0);
}

TEST_CASE("pij experiment brackets and formats") {
  nlohmann::json j{{"experiment", "fig3_pij"},
                   {"runs", 2},
                   {"seed", 9},
                   {"rows", 8},
                   {"cols", 8},
                   {"pij_samples", 500},
                   {"pij_route_hops", 6}};
  const auto r = run_experiment(parse_config(j));
  REQUIRE(!r.rows.empty());
  CHECK(r.rows[0][1] == "0");
  CHECK(r.rows[0][2] == "1");  // h = 0 estimate is exactly one
}

TEST_CASE("csv writer joins columns and rows") {
  ExperimentResult r;
  r.columns = {"a", "b"};
  r.rows = {{"1", "2"}, {"x", "y"}};
  CHECK(write_csv(r) == "a,b\n1,2\nx,y\n");
}
