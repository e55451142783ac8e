// Command-line front end: runs declarative experiments, prints the
// closed-form bounds, solves instances with the exhaustive oracle, and
// estimates link-dependency probabilities on lattices.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "preempt/analysis.hpp"
#include "preempt/experiment.hpp"

namespace {

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write to " + path);
  out << text;
}

int run_command(const std::string& config_path, std::optional<std::uint64_t> seed,
                std::string out_path, const std::string& format) {
  auto cfg = preempt::parse_config_file(config_path);
  if (seed) cfg.seed = *seed;
  if (out_path.empty()) out_path = cfg.output;
  const auto result = preempt::run_experiment(cfg);
  if (format == "json") {
    write_output(out_path, result.payload.dump(2) + "\n");
  } else {
    write_output(out_path, preempt::write_csv(result));
  }
  return 0;
}

int bounds_command(int L, int d0, double pc, int nd, double cnew, double epsb, double eps,
                   int hmax, const std::string& out_path, const std::string& format) {
  preempt::BoundParams p;
  p.route_hops = L;
  p.degree = d0;
  p.p_c = pc;
  p.n_d = nd;
  p.c_new = cnew;
  p.eps_b = epsb;
  p.epsilon = eps;
  p.validate();

  preempt::ExperimentResult table;
  table.columns = {"quantity", "h_or_nd", "value"};
  auto add = [&table](const std::string& q, const std::string& x, double v) {
    table.rows.push_back({q, x, preempt::format_number(v)});
    table.payload["rows"].push_back({{"quantity", q}, {"x", x}, {"value", v}});
  };
  for (int h = 1; h <= std::min(hmax, L); ++h)
    add("pij_lower", std::to_string(h), preempt::link_dependency_lower(L, d0, h));
  for (int h = 2; h <= std::min(hmax, L); ++h) {
    add("pij_upper", std::to_string(h), preempt::link_dependency_upper(L, h));
    add("pij_upper_asymptotic", std::to_string(h), preempt::link_dependency_upper_asymptotic(L, h, 3));
    add("pij_upper_asymptotic_alt", std::to_string(h),
        preempt::link_dependency_upper_asymptotic(L, h, 2));
  }
  for (int n = 0; n < L; ++n) {
    preempt::BoundParams q = p;
    q.n_d = n;
    add("delta_bound", std::to_string(n), preempt::optimality_gap_bound(q));
    const auto approx = preempt::optimality_gap_bound_approx(q);
    if (approx.applicable) add("delta_bound_approx", std::to_string(n), approx.value);
  }
  const auto min_nd = preempt::min_neighborhood_for_target(p);
  table.rows.push_back(
      {"min_nd_for_epsilon", preempt::format_number(eps),
       min_nd ? std::to_string(*min_nd) : std::string("unsatisfiable")});
  table.payload["min_nd_for_epsilon"] =
      min_nd ? nlohmann::json(*min_nd) : nlohmann::json("unsatisfiable");

  if (format == "json") {
    write_output(out_path, table.payload.dump(2) + "\n");
  } else {
    write_output(out_path, preempt::write_csv(table));
  }
  return 0;
}

int oracle_command(const std::string& instance_path, const std::string& out_path,
                   const std::string& format) {
  std::ifstream in(instance_path);
  if (!in) throw std::runtime_error("cannot open instance file: " + instance_path);
  const auto inst = preempt::instance_from_json(nlohmann::json::parse(in));
  const auto best = preempt::brute_force_optimal(inst);
  nlohmann::json j;
  j["optimal"] = preempt::to_json(inst, best);
  j["hamiltonian_optimal"] =
      preempt::to_json(inst, preempt::hamiltonian_optimal(inst));
  if (format == "csv") {
    preempt::ExperimentResult table;
    table.columns = {"cost", "feasible", "preempted_flows"};
    std::string ids;
    for (size_t k = 0; k < best.global.size(); ++k)
      if (best.global[k]) {
        if (!ids.empty()) ids += ' ';
        ids += std::to_string(inst.flows[k].id);
      }
    table.rows.push_back(
        {preempt::format_number(best.cost), best.feasible ? "1" : "0", ids});
    write_output(out_path, preempt::write_csv(table));
  } else {
    write_output(out_path, j.dump(2) + "\n");
  }
  return 0;
}

int pij_command(int rows, int cols, double capacity, int samples, int runs,
                int route_hops, std::uint64_t seed, const std::string& out_path,
                const std::string& format) {
  preempt::ExperimentConfig cfg;
  cfg.kind = preempt::ExperimentKind::fig3_pij;
  cfg.rows = rows;
  cfg.cols = cols;
  cfg.capacity = capacity;
  cfg.pij_samples = samples;
  cfg.runs = runs;
  cfg.pij_route_hops = route_hops;
  cfg.seed = seed;
  const auto result = preempt::run_experiment(cfg);
  if (format == "json") {
    write_output(out_path, result.payload.dump(2) + "\n");
  } else {
    write_output(out_path, preempt::write_csv(result));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed connection-preemption simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_path;
  std::string format = "csv";
  std::optional<std::uint64_t> seed_override;
  app.add_option("--out", out_path, "output file (default: config value or stdout)");
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed_override, "override the experiment seed");

  auto* run = app.add_subcommand("run", "execute an experiment config");
  std::string config_path;
  run->add_option("config", config_path, "JSON experiment config")->required();

  auto* bounds = app.add_subcommand("bounds", "print closed-form bound tables");
  int L = 10, d0 = 4, nd = 1, hmax = 6;
  double pc = 1.0 / 3.0, cnew = 20.0, epsb = 0.0, eps = 10.0;
  bounds->add_option("--L", L, "route hop count");
  bounds->add_option("--d0", d0, "nodal degree");
  bounds->add_option("--pc", pc, "flow-continuity probability");
  bounds->add_option("--nd", nd, "neighborhood size");
  bounds->add_option("--cnew", cnew, "new-call bandwidth demand");
  bounds->add_option("--epsb", epsb, "relative bandwidth spread");
  bounds->add_option("--eps", eps, "target performance for the minimum N_d");
  bounds->add_option("--hmax", hmax, "largest hop separation tabulated");

  auto* oracle = app.add_subcommand("oracle", "exhaustive optimum of one instance");
  std::string instance_path;
  oracle->add_option("instance", instance_path, "instance JSON file")->required();

  auto* pij = app.add_subcommand("pij", "estimate link-dependency probabilities");
  int prows = 10, pcols = 25, samples = 10000, runs = 10, route_hops = 10;
  double capacity = 100.0;
  std::uint64_t pij_seed = 1;
  pij->add_option("--rows", prows, "lattice rows");
  pij->add_option("--cols", pcols, "lattice cols");
  pij->add_option("--capacity", capacity, "link capacity");
  pij->add_option("--samples", samples, "flows sampled per run");
  pij->add_option("--runs", runs, "independent runs averaged");
  pij->add_option("--route-hops", route_hops, "route length for the estimate");
  pij->add_option("--pij-seed", pij_seed, "seed for the estimator");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(config_path, seed_override, out_path, format);
    if (bounds->parsed())
      return bounds_command(L, d0, pc, nd, cnew, epsb, eps, hmax, out_path, format);
    if (oracle->parsed()) return oracle_command(instance_path, out_path, format);
    if (pij->parsed())
      return pij_command(prows, pcols, capacity, samples, runs, route_hops,
                         seed_override.value_or(pij_seed), out_path, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
