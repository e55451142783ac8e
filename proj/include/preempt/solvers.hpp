#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "preempt/model.hpp"
#include "preempt/random.hpp"

namespace preempt {

struct GibbsConfig {
  int n_d = 1;               // neighborhood size for decision exchange
  double t0 = 3.0;           // initial temperature of the cooling schedule
  int max_sweeps = 500;
  int stability_window = 3;  // zero-flip sweeps before declaring equilibrium
  std::uint64_t seed = 0;
  bool repair = true;

  void validate() const {
    if (n_d < 0) throw std::invalid_argument("neighborhood size must be >= 0");
    if (t0 <= 0.0) throw std::invalid_argument("T0 must be > 0");
    if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be >= 1");
    if (stability_window < 1) throw std::invalid_argument("stability_window must be >= 1");
  }
};

struct SweepStat {
  double h = 0.0;
  double h_local = 0.0;
  int flips = 0;
  long long messages = 0;  // cumulative
};

struct SolverTrace {
  std::vector<SweepStat> per_sweep;
  int sweeps = 0;          // sampling sweeps executed
  int polish_sweeps = 0;   // zero-temperature passes appended after sampling
  long long messages_exchanged = 0;
  bool converged = false;
  bool repaired = false;
  int n_d = 0;
  int f_max = 0;
};

struct SolverResult {
  DecisionMatrix decisions;
  GlobalDecision global;
  double cost = 0.0;
  double cost_unrepaired = 0.0;  // objective before the greedy repair step
  bool feasible = false;
  SolverTrace trace;
};

/// trace CSV: sweep, H, Hl, flips, messages (cumulative).
inline std::string trace_to_csv(const SolverTrace& trace) {
  std::string out = "sweep,H,Hl,flips,messages\n";
  for (size_t i = 0; i < trace.per_sweep.size(); ++i) {
    const auto& s = trace.per_sweep[i];
    out += std::to_string(i + 1) + ',' + std::to_string(s.h) + ',' + std::to_string(s.h_local) +
           ',' + std::to_string(s.flips) + ',' + std::to_string(s.messages) + '\n';
  }
  return out;
}

/// {decisions:[{k, span, d}], global, cost, feasible, trace:{...}}
inline nlohmann::json to_json(const PreemptionInstance& inst, const SolverResult& r) {
  nlohmann::json j;
  auto& jd = j["decisions"] = nlohmann::json::array();
  for (size_t k = 0; k < inst.flows.size(); ++k) {
    const auto& f = inst.flows[k];
    nlohmann::json row = nlohmann::json::array();
    for (int i = f.span_lo; i <= f.span_hi; ++i)
      row.push_back(r.decisions.get(f, static_cast<int>(k), i));
    jd.push_back({{"k", f.id}, {"span", {f.span_lo, f.span_hi}}, {"d", row}});
  }
  j["global"] = r.global;
  j["cost"] = r.cost;
  j["cost_unrepaired"] = r.cost_unrepaired;
  j["feasible"] = r.feasible;
  j["trace"] = {{"sweeps", r.trace.sweeps},
                {"polish_sweeps", r.trace.polish_sweeps},
                {"messages_exchanged", r.trace.messages_exchanged},
                {"converged", r.trace.converged},
                {"repaired", r.trace.repaired},
                {"n_d", r.trace.n_d},
                {"f_max", r.trace.f_max}};
  return j;
}

namespace detail {

inline void finalize_result(const PreemptionInstance& inst, SolverResult& r) {
  r.global = global_decision(inst, r.decisions);
  r.cost = objective(inst, r.global);
  if (!r.trace.repaired) r.cost_unrepaired = r.cost;
  r.feasible = feasible(inst, r.global);
  r.trace.f_max = inst.max_flows_per_link();
}

/// Energy from the sampler's incremental state.
inline double energy_from_state(const PreemptionInstance& inst, const std::vector<int>& ones,
                                const std::vector<double>& avail) {
  double h = 0.0;
  for (size_t k = 0; k < inst.flows.size(); ++k)
    if (ones[k] > 0) h += inst.weight(inst.flows[k]);
  for (int i = 0; i < inst.link_count; ++i)
    h += inst.beta * step_violation(inst.new_call_bw - avail[static_cast<size_t>(i)]);
  return h;
}

}  // namespace detail

/// Distributed preemption by stochastic relaxation. Each sweep visits every
/// (link, flow) incidence in seeded-random order and resamples the local
/// decision from the two-state conditional of the truncated energy, using only
/// decisions of links within n_d hops. The temperature follows
/// T(t) = T0 / ln(1 + t). After the sampling phase a deterministic
/// zero-temperature polish accepts energy-reducing flips until none remain,
/// and (optionally) a greedy repair preempts the cheapest extra flows at links
/// the sampler left short.
inline SolverResult gibbs_solve(const PreemptionInstance& inst, const GibbsConfig& cfg) {
  inst.validate();
  cfg.validate();
  auto rng = make_rng(cfg.seed);
  const int L = inst.link_count;
  const size_t F = inst.flows.size();

  struct Incidence {
    int flow;
    int link;
  };
  std::vector<Incidence> incidences;
  for (size_t k = 0; k < F; ++k)
    for (int i = inst.flows[k].span_lo; i <= inst.flows[k].span_hi; ++i)
      incidences.push_back({static_cast<int>(k), i});

  DecisionMatrix d(inst);
  std::vector<double> avail(inst.free_bw);
  std::vector<int> ones(F, 0);

  SolverResult result;
  result.trace.n_d = cfg.n_d;
  long long messages = 0;
  int zero_flip_streak = 0;
  bool converged = false;
  int sweeps = 0;

  for (int t = 1; t <= cfg.max_sweeps; ++t) {
    const double temperature = cfg.t0 / std::log(1.0 + t);
    // Fisher-Yates with the solver's own stream keeps sweeps reproducible.
    for (size_t i = incidences.size(); i > 1; --i)
      std::swap(incidences[i - 1], incidences[uniform_index(rng, i)]);

    int flips = 0;
    for (const Incidence& inc : incidences) {
      const RouteFlow& f = inst.flows[static_cast<size_t>(inc.flow)];
      const double w = inst.weight(f);
      const int cur = d.get(f, inc.flow, inc.link);

      const int jlo = std::max(f.span_lo, inc.link - cfg.n_d);
      const int jhi = std::min(f.span_hi, inc.link + cfg.n_d);
      double neighbor_sum = 0.0;
      for (int j = jlo; j <= jhi; ++j) {
        if (j == inc.link) continue;
        neighbor_sum += d.get(f, inc.flow, j);
      }
      messages += (jhi - jlo);  // span-neighbors contacted, excluding self

      const double a_others = avail[static_cast<size_t>(inc.link)] - f.bandwidth * cur;
      const double psi1 =
          w - w * neighbor_sum +
          inst.beta * step_violation(inst.new_call_bw - (a_others + f.bandwidth));
      const double psi0 = inst.beta * step_violation(inst.new_call_bw - a_others);
      const double p_one = 1.0 / (1.0 + std::exp((psi1 - psi0) / temperature));

      const int next = chance(rng, p_one) ? 1 : 0;
      if (next != cur) {
        d.set(f, inc.flow, inc.link, next);
        avail[static_cast<size_t>(inc.link)] += f.bandwidth * (next - cur);
        ones[static_cast<size_t>(inc.flow)] += next - cur;
        ++flips;
      }
    }
    ++sweeps;
    result.trace.per_sweep.push_back({detail::energy_from_state(inst, ones, avail),
                                      local_hamiltonian(inst, d, cfg.n_d), flips, messages});
    if (flips == 0) {
      if (++zero_flip_streak >= cfg.stability_window) {
        converged = true;
        break;
      }
    } else {
      zero_flip_streak = 0;
    }
  }

  // Zero-temperature polish: descent on the exact energy, plus draining of
  // redundant ones along zero-cost plateaus (an entry of an already-preempted
  // flow at a link with slack changes nothing until the last one goes, so
  // strict descent alone cannot retract an over-extended flow). Every accepted
  // flip decreases (H, number of ones) lexicographically, so this terminates.
  int polish_sweeps = 0;
  for (bool changed = true; changed;) {
    changed = false;
    int flips = 0;
    for (size_t k = 0; k < F; ++k) {
      const RouteFlow& f = inst.flows[k];
      const double w = inst.weight(f);
      for (int i = f.span_lo; i <= f.span_hi; ++i) {
        const int cur = d.get(f, static_cast<int>(k), i);
        const int next = 1 - cur;
        double delta = 0.0;
        if (next == 1 && ones[k] == 0) delta += w;
        if (next == 0 && ones[k] == 1) delta -= w;
        const double a_new = avail[static_cast<size_t>(i)] + f.bandwidth * (next - cur);
        delta += inst.beta * (step_violation(inst.new_call_bw - a_new) -
                              step_violation(inst.new_call_bw - avail[static_cast<size_t>(i)]));
        if (delta < 0.0 || (delta == 0.0 && cur == 1)) {
          d.set(f, static_cast<int>(k), i, next);
          avail[static_cast<size_t>(i)] = a_new;
          ones[k] += next - cur;
          changed = true;
          ++flips;
        }
      }
    }
    ++polish_sweeps;
    result.trace.per_sweep.push_back({detail::energy_from_state(inst, ones, avail),
                                      local_hamiltonian(inst, d, cfg.n_d), flips, messages});
  }

  result.cost_unrepaired = objective(inst, global_decision(inst, d));

  bool repaired = false;
  if (cfg.repair) {
    GlobalDecision g = global_decision(inst, d);
    auto effective = [&](int link) {
      double a = inst.free_bw[static_cast<size_t>(link)];
      for (size_t k = 0; k < F; ++k)
        if (g[k] && inst.flows[k].on_link(link)) a += inst.flows[k].bandwidth;
      return a;
    };
    for (int i = 0; i < L; ++i) {
      while (effective(i) < inst.new_call_bw) {
        int pick = -1;
        for (size_t k = 0; k < F; ++k) {
          if (g[k] || !inst.flows[k].on_link(i)) continue;
          if (pick < 0 || inst.weight(inst.flows[k]) < inst.weight(inst.flows[static_cast<size_t>(pick)]))
            pick = static_cast<int>(k);
        }
        if (pick < 0) break;  // nothing left to preempt here
        g[static_cast<size_t>(pick)] = 1;
        const RouteFlow& f = inst.flows[static_cast<size_t>(pick)];
        for (int j = f.span_lo; j <= f.span_hi; ++j) d.set(f, pick, j, 1);
        repaired = true;
      }
    }
  }

  result.decisions = std::move(d);
  result.trace.sweeps = sweeps;
  result.trace.polish_sweeps = polish_sweeps;
  result.trace.messages_exchanged = messages;
  result.trace.converged = converged;
  result.trace.repaired = repaired;
  detail::finalize_result(inst, result);
  return result;
}

namespace detail {

/// Compares flow-id subsets as sorted id sequences.
inline bool lex_mask_less(std::uint32_t a, std::uint32_t b) {
  while (a && b) {
    const int la = std::countr_zero(a);
    const int lb = std::countr_zero(b);
    if (la != lb) return la < lb;
    a &= a - 1;
    b &= b - 1;
  }
  return a == 0 && b != 0;
}

struct ExhaustiveScan {
  bool any_feasible = false;
  std::uint32_t best_feasible = 0;  // min cost, then fewest flows, then lex ids
  double best_cost = 0.0;
  int best_count = 0;
  std::uint32_t best_h_mask = 0;  // global minimizer of the exact energy
  double best_h = 0.0;
};

/// Gray-code walk over all global decisions, tracking the best feasible
/// objective and the exact-energy minimum in one pass.
inline ExhaustiveScan scan_global_decisions(const PreemptionInstance& inst) {
  const size_t F = inst.flows.size();
  if (F > 24) throw std::invalid_argument("instance too large for exhaustive search");
  const int L = inst.link_count;

  std::vector<double> avail(inst.free_bw);
  int deficient = 0;
  for (int i = 0; i < L; ++i)
    if (avail[static_cast<size_t>(i)] < inst.new_call_bw) ++deficient;

  ExhaustiveScan scan;
  double cost = 0.0;
  bool h_initialized = false;
  int best_h_count = 0;
  auto consider = [&](std::uint32_t mask, int count) {
    const double h = cost + inst.beta * deficient;
    if (deficient == 0) {
      if (!scan.any_feasible || cost < scan.best_cost ||
          (cost == scan.best_cost &&
           (count < scan.best_count ||
            (count == scan.best_count && lex_mask_less(mask, scan.best_feasible))))) {
        scan.any_feasible = true;
        scan.best_feasible = mask;
        scan.best_cost = cost;
        scan.best_count = count;
      }
    }
    if (!h_initialized || h < scan.best_h ||
        (h == scan.best_h && (count < best_h_count ||
                              (count == best_h_count && lex_mask_less(mask, scan.best_h_mask))))) {
      h_initialized = true;
      scan.best_h = h;
      scan.best_h_mask = mask;
      best_h_count = count;
    }
  };

  consider(0, 0);

  const std::uint64_t total = 1ull << F;
  std::uint32_t gray = 0;
  for (std::uint64_t n = 1; n < total; ++n) {
    const int flipped = std::countr_zero(n);
    gray ^= (1u << flipped);
    const bool now_on = (gray >> flipped) & 1u;
    const RouteFlow& f = inst.flows[static_cast<size_t>(flipped)];
    const double sign = now_on ? 1.0 : -1.0;
    cost += sign * inst.weight(f);
    for (int i = f.span_lo; i <= f.span_hi; ++i) {
      const double before = avail[static_cast<size_t>(i)];
      const double after = before + sign * f.bandwidth;
      avail[static_cast<size_t>(i)] = after;
      const bool was_def = before < inst.new_call_bw;
      const bool is_def = after < inst.new_call_bw;
      deficient += static_cast<int>(is_def) - static_cast<int>(was_def);
    }
    consider(gray, std::popcount(gray));
  }
  return scan;
}

inline GlobalDecision mask_to_global(const PreemptionInstance& inst, std::uint32_t mask) {
  GlobalDecision g(inst.flows.size(), 0);
  for (size_t k = 0; k < inst.flows.size(); ++k)
    if (mask & (1u << k)) g[k] = 1;
  return g;
}

inline SolverResult result_from_global(const PreemptionInstance& inst, const GlobalDecision& g) {
  SolverResult r;
  r.decisions = propagate(inst, g);
  r.trace.converged = true;
  detail::finalize_result(inst, r);
  return r;
}

}  // namespace detail

/// Exhaustive centralized optimum: minimum weighted preempted bandwidth over
/// consistent global decisions subject to per-link feasibility. Ties broken by
/// fewest preempted flows, then lexicographic flow-id order. When no decision
/// is feasible, returns full preemption flagged infeasible.
inline SolverResult brute_force_optimal(const PreemptionInstance& inst) {
  inst.validate();
  auto scan = detail::scan_global_decisions(inst);
  GlobalDecision g;
  if (scan.any_feasible) {
    g = detail::mask_to_global(inst, scan.best_feasible);
  } else {
    g.assign(inst.flows.size(), 1);
  }
  return detail::result_from_global(inst, g);
}

/// Exhaustive minimizer of the exact energy (objective plus beta penalties).
/// Unlike brute_force_optimal this is well-defined on instances where no
/// decision is feasible, making it the reference point for near-optimality
/// measurements.
inline SolverResult hamiltonian_optimal(const PreemptionInstance& inst) {
  inst.validate();
  auto scan = detail::scan_global_decisions(inst);
  return detail::result_from_global(inst, detail::mask_to_global(inst, scan.best_h_mask));
}

/// Decentralized baseline: each deficient link independently preempts its
/// largest local flows until the new call fits, with no information exchange.
inline SolverResult min_conn(const PreemptionInstance& inst) {
  inst.validate();
  DecisionMatrix d(inst);
  for (int i = 0; i < inst.link_count; ++i) {
    double a = inst.free_bw[static_cast<size_t>(i)];
    if (a >= inst.new_call_bw) continue;
    std::vector<int> local;
    for (size_t k = 0; k < inst.flows.size(); ++k)
      if (inst.flows[k].on_link(i)) local.push_back(static_cast<int>(k));
    std::sort(local.begin(), local.end(), [&](int x, int y) {
      const double bx = inst.flows[static_cast<size_t>(x)].bandwidth;
      const double by = inst.flows[static_cast<size_t>(y)].bandwidth;
      if (bx != by) return bx > by;
      return x < y;
    });
    for (int k : local) {
      if (a >= inst.new_call_bw) break;
      d.set(inst.flows[static_cast<size_t>(k)], k, i, 1);
      a += inst.flows[static_cast<size_t>(k)].bandwidth;
    }
  }
  SolverResult r;
  r.decisions = std::move(d);
  r.trace.converged = true;
  detail::finalize_result(inst, r);
  return r;
}

/// Decentralized baseline: each deficient link exhaustively picks the local
/// flow subset of minimum weighted bandwidth that makes the new call fit.
inline SolverResult min_bw(const PreemptionInstance& inst) {
  inst.validate();
  DecisionMatrix d(inst);
  for (int i = 0; i < inst.link_count; ++i) {
    const double base = inst.free_bw[static_cast<size_t>(i)];
    if (base >= inst.new_call_bw) continue;
    std::vector<int> local;
    for (size_t k = 0; k < inst.flows.size(); ++k)
      if (inst.flows[k].on_link(i)) local.push_back(static_cast<int>(k));
    if (local.size() > 20)
      throw std::invalid_argument("too many flows on one link for exhaustive Min-BW");

    std::uint32_t best_mask = 0;
    double best_weight = 0.0;
    int best_count = 0;
    bool found = false;
    double weight_sum = 0.0, bw_sum = 0.0;
    std::uint32_t gray = 0;
    const std::uint64_t total = 1ull << local.size();
    for (std::uint64_t n = 1; n < total; ++n) {
      const int flipped = std::countr_zero(n);
      gray ^= (1u << flipped);
      const RouteFlow& f = inst.flows[static_cast<size_t>(local[static_cast<size_t>(flipped)])];
      const double sign = ((gray >> flipped) & 1u) ? 1.0 : -1.0;
      weight_sum += sign * inst.weight(f);
      bw_sum += sign * f.bandwidth;
      if (base + bw_sum < inst.new_call_bw) continue;
      const int count = std::popcount(gray);
      if (!found || weight_sum < best_weight ||
          (weight_sum == best_weight &&
           (count < best_count ||
            (count == best_count && detail::lex_mask_less(gray, best_mask))))) {
        found = true;
        best_mask = gray;
        best_weight = weight_sum;
        best_count = count;
      }
    }
    if (!found) best_mask = static_cast<std::uint32_t>(total - 1);  // preempt everything local
    for (size_t b = 0; b < local.size(); ++b)
      if (best_mask & (1u << b)) {
        const int k = local[b];
        d.set(inst.flows[static_cast<size_t>(k)], k, i, 1);
      }
  }
  SolverResult r;
  r.decisions = std::move(d);
  r.trace.converged = true;
  detail::finalize_result(inst, r);
  return r;
}

}  // namespace preempt
