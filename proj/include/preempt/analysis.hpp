#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "preempt/model.hpp"
#include "preempt/solvers.hpp"
#include "preempt/traffic.hpp"

namespace preempt {

/// Parameter bundle for the closed-form performance bounds.
struct BoundParams {
  int route_hops = 10;     // L
  int degree = 4;          // d0
  double p_c = 1.0 / 3.0;  // flow-continuity probability
  int n_d = 1;             // neighborhood size
  double c_new = 20.0;
  double eps_b = 0.0;      // relative bandwidth spread
  double epsilon = 1.0;    // target performance

  void validate() const {
    if (route_hops < 1) throw std::invalid_argument("L must be >= 1");
    if (degree < 2) throw std::invalid_argument("nodal degree must be >= 2");
    if (p_c <= 0.0 || p_c >= 1.0) throw std::invalid_argument("p_c must be in (0, 1)");
    if (eps_b < 0.0 || eps_b >= 1.0) throw std::invalid_argument("eps_B must be in [0, 1)");
    if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be > 0");
    if (c_new <= 0.0) throw std::invalid_argument("c_new must be > 0");
  }
};

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

/// Lower bound of the link-dependency probability for two route links h hops
/// apart: ((L - h) / L) * (1 / (d0 - 1))^h.
inline double link_dependency_lower(int route_hops, int degree, int h) {
  if (h < 1 || h > route_hops) throw std::invalid_argument("h must be in [1, L]");
  if (degree < 2) throw std::invalid_argument("nodal degree must be >= 2");
  return (static_cast<double>(route_hops - h) / route_hops) *
         std::pow(1.0 / (degree - 1), h);
}

/// Upper bound on a degree-4 lattice, from shortest-path counting:
/// ((L - h) / L) * C(h, floor(h/2)) / (2 (2^h - 1)) at h = 2, denominator
/// 3 (2^h - 1) beyond. Odd h uses the maximizing binomial C(h, floor(h/2)).
inline double link_dependency_upper(int route_hops, int h) {
  if (h < 2) throw std::invalid_argument("h must be >= 2");
  if (h > route_hops) throw std::invalid_argument("h must be <= L");
  const double denom = (h == 2 ? 2.0 : 3.0) * (std::pow(2.0, h) - 1.0);
  return (static_cast<double>(route_hops - h) / route_hops) * binomial(h, h / 2) / denom;
}

/// Stirling form of the upper bound, with the constant from the bound's
/// statement (1/3) or from the appendix derivation (1/2).
inline double link_dependency_upper_asymptotic(int route_hops, int h, int denominator_constant = 3) {
  if (h < 2) throw std::invalid_argument("h must be >= 2");
  if (denominator_constant != 2 && denominator_constant != 3)
    throw std::invalid_argument("constant must be 2 or 3");
  return (static_cast<double>(route_hops - h) / route_hops) /
         (denominator_constant * std::sqrt(2.0 * M_PI * h));
}

/// Near-optimality error bound for geometric flows with bounded bandwidths:
/// 2 c_new (1+eps_B)/(1-eps_B) L [(1 + p_c^Nd)^(L-Nd) - 1].
inline double optimality_gap_bound(const BoundParams& p) {
  p.validate();
  if (p.n_d < 0 || p.n_d >= p.route_hops)
    throw std::invalid_argument("N_d must satisfy 0 <= N_d < L");
  const double spread = (1.0 + p.eps_b) / (1.0 - p.eps_b);
  const double q = std::pow(p.p_c, p.n_d);
  return 2.0 * p.c_new * spread * p.route_hops *
         (std::pow(1.0 + q, p.route_hops - p.n_d) - 1.0);
}

struct ApproxBound {
  double value = 0.0;
  bool applicable = false;  // p_c^Nd * L < 0.1
};

/// First-order form 2 c_new (1+eps_B)/(1-eps_B) L (L-Nd) p_c^Nd, meaningful
/// when p_c^Nd L is small.
inline ApproxBound optimality_gap_bound_approx(const BoundParams& p) {
  p.validate();
  if (p.n_d < 0 || p.n_d >= p.route_hops)
    throw std::invalid_argument("N_d must satisfy 0 <= N_d < L");
  const double spread = (1.0 + p.eps_b) / (1.0 - p.eps_b);
  const double q = std::pow(p.p_c, p.n_d);
  ApproxBound b;
  b.value = 2.0 * p.c_new * spread * p.route_hops * (p.route_hops - p.n_d) * q;
  b.applicable = q * p.route_hops < 0.1;
  return b;
}

/// Smallest neighborhood size whose bound meets the target performance,
/// found by direct search over N_d in [0, L-1]. Empty when even full-route
/// exchange cannot meet it.
inline std::optional<int> min_neighborhood_for_target(const BoundParams& p) {
  p.validate();
  BoundParams q = p;
  for (int nd = 0; nd < p.route_hops; ++nd) {
    q.n_d = nd;
    if (optimality_gap_bound(q) <= p.epsilon) return nd;
  }
  return std::nullopt;
}

/// Near-optimality record: per-trial gap between the exact-energy optimum and
/// the distributed result, both measured with the exact Hamiltonian.
struct DeltaReport {
  std::vector<double> deltas;
  double mean = 0.0;
  int trials = 0;
  double bound = 0.0;
  bool has_bound = false;
  bool bound_satisfied = false;
};

/// Repeated distributed solves of one instance against its exhaustive optimum.
inline DeltaReport measure_delta(const PreemptionInstance& inst, const GibbsConfig& cfg,
                                 int trials, std::uint64_t seed,
                                 std::optional<double> bound = std::nullopt) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const SolverResult best = hamiltonian_optimal(inst);
  const double h_star = hamiltonian(inst, best.decisions);
  DeltaReport report;
  report.trials = trials;
  for (int t = 0; t < trials; ++t) {
    GibbsConfig c = cfg;
    c.seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    const SolverResult got = gibbs_solve(inst, c);
    const double h_hat = hamiltonian(inst, got.decisions);
    report.deltas.push_back(std::abs(h_star - h_hat));
  }
  for (double v : report.deltas) report.mean += v;
  report.mean /= report.trials;
  if (bound) {
    report.has_bound = true;
    report.bound = *bound;
    report.bound_satisfied = report.mean <= *bound;
  }
  return report;
}

/// Fixture for bound validation: geometric route flows turned into instances.
struct RouteDeltaParams {
  RouteTrafficSpec spec;          // p_c, L, B0, eps_B, flows_per_link
  double free_bw_per_link = 12.0;
  double c_new = 20.0;
  int new_call_class = 2;
};

/// Monte-Carlo E(Delta) over random geometric flows: a fresh instance and a
/// fresh distributed solve per trial, compared against the bound of the
/// matching parameters.
inline DeltaReport delta_over_route_flows(const RouteDeltaParams& params, const GibbsConfig& cfg,
                                          int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  DeltaReport report;
  report.trials = trials;
  for (int t = 0; t < trials; ++t) {
    RouteTrafficSpec spec = params.spec;
    spec.seed = derive_seed(seed, 2 * static_cast<std::uint64_t>(t));
    const auto flows = generate_route_flows(spec);
    const auto inst = make_route_instance(
        spec.route_hops, flows,
        std::vector<double>(static_cast<size_t>(spec.route_hops), params.free_bw_per_link),
        params.c_new, params.new_call_class, {{1, 1.0}, {2, 2.0}});
    GibbsConfig c = cfg;
    c.seed = derive_seed(seed, 2 * static_cast<std::uint64_t>(t) + 1);
    const SolverResult got = gibbs_solve(inst, c);
    const SolverResult best = hamiltonian_optimal(inst);
    report.deltas.push_back(
        std::abs(hamiltonian(inst, best.decisions) - hamiltonian(inst, got.decisions)));
  }
  for (double v : report.deltas) report.mean += v;
  report.mean /= report.trials;

  BoundParams bp;
  bp.route_hops = params.spec.route_hops;
  bp.p_c = params.spec.p_c;
  bp.n_d = cfg.n_d;
  bp.c_new = params.c_new;
  bp.eps_b = params.spec.eps_b;
  report.bound = optimality_gap_bound(bp);
  report.has_bound = true;
  report.bound_satisfied = report.mean <= report.bound;
  return report;
}

/// Preempted bandwidth averaged over route links. Pieces of a split flow
/// count once via their source id.
inline double avg_preempted_bw(const PreemptionInstance& inst, const SolverResult& result) {
  std::vector<int> sources;
  double total = 0.0;
  for (size_t k = 0; k < inst.flows.size(); ++k) {
    if (!result.global[k]) continue;
    const int src = inst.flows[k].source_id;
    if (std::find(sources.begin(), sources.end(), src) != sources.end()) continue;
    sources.push_back(src);
    total += inst.flows[k].bandwidth;
  }
  return total / inst.link_count;
}

struct CcReport {
  long long messages = 0;  // measured
  long long envelope = 0;  // N_d * f_max * i_ter
};

/// Measured message volume next to the analytic complexity envelope.
inline CcReport communication_complexity(const SolverTrace& trace) {
  CcReport r;
  r.messages = trace.messages_exchanged;
  r.envelope = static_cast<long long>(trace.n_d) * trace.f_max * trace.sweeps;
  return r;
}

}  // namespace preempt
