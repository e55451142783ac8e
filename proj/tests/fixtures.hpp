#pragma once

#include <vector>

#include "preempt/model.hpp"
#include "preempt/random.hpp"
#include "preempt/traffic.hpp"

namespace fixtures {

/// Line topology: nodes 0..n-1, unit-spaced edges, uniform capacity.
inline preempt::Topology make_path_topology(int n, double capacity) {
  std::vector<preempt::Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return preempt::Topology(n, std::move(edges),
                           std::vector<double>(static_cast<size_t>(n - 1), capacity));
}

/// The worked four-link example: five unit-bandwidth flows, one spanning links
/// 0-2, one on link 3, one on link 0, one on link 1, one spanning links 2-3.
/// Every link starts with zero free bandwidth and the new call needs one unit,
/// so the optimum preempts exactly flows 0 and 1 at cost 2.
inline preempt::PreemptionInstance make_four_link_instance(double beta = 100.0) {
  preempt::PreemptionInstance inst;
  inst.link_count = 4;
  inst.free_bw = {0.0, 0.0, 0.0, 0.0};
  inst.new_call_bw = 1.0;
  inst.new_call_class = 2;
  inst.alpha = {{1, 1.0}, {2, 2.0}};
  inst.beta = beta;
  auto add = [&](int lo, int hi) {
    preempt::RouteFlow f;
    f.id = static_cast<int>(inst.flows.size());
    f.source_id = f.id;
    f.priority_class = 1;
    f.bandwidth = 1.0;
    f.span_lo = lo;
    f.span_hi = hi;
    inst.flows.push_back(f);
  };
  add(0, 2);
  add(3, 3);
  add(0, 0);
  add(1, 1);
  add(2, 3);
  inst.validate();
  return inst;
}

/// Seeded random instance for exhaustive cross-checks. Spans are geometric
/// with the given continuation probability, truncated at the route end.
inline preempt::PreemptionInstance make_random_instance(std::mt19937_64& rng, int link_count,
                                                        int flow_count, double p_c = 0.3,
                                                        double b_lo = 8.0, double b_hi = 12.0,
                                                        double free_lo = 0.0,
                                                        double free_hi = 12.0,
                                                        double c_new = 20.0) {
  preempt::PreemptionInstance inst;
  inst.link_count = link_count;
  inst.new_call_bw = c_new;
  inst.new_call_class = 2;
  inst.alpha = {{1, 1.0}, {2, 2.0}};
  for (int i = 0; i < link_count; ++i)
    inst.free_bw.push_back(preempt::uniform_real(rng, free_lo, free_hi));
  for (int k = 0; k < flow_count; ++k) {
    preempt::RouteFlow f;
    f.id = k;
    f.source_id = k;
    f.priority_class = 1;
    f.bandwidth = preempt::uniform_real(rng, b_lo, b_hi);
    f.span_lo = static_cast<int>(preempt::uniform_index(rng, static_cast<std::uint64_t>(link_count)));
    f.span_hi = f.span_lo;
    while (f.span_hi + 1 < link_count && preempt::chance(rng, p_c)) ++f.span_hi;
    inst.flows.push_back(f);
  }
  inst.beta = preempt::default_beta(inst);
  inst.validate();
  return inst;
}

/// Enumerates every decision matrix of an instance (incidence count <= 24).
template <typename Fn>
inline void for_each_decision(const preempt::PreemptionInstance& inst, Fn&& fn) {
  const int bits = inst.incidence_count();
  for (std::uint32_t mask = 0; mask < (1u << bits); ++mask) {
    preempt::DecisionMatrix d(inst);
    int b = 0;
    for (size_t k = 0; k < inst.flows.size(); ++k)
      for (int i = inst.flows[k].span_lo; i <= inst.flows[k].span_hi; ++i, ++b)
        d.set(inst.flows[k], static_cast<int>(k), i, (mask >> b) & 1u);
    fn(d);
  }
}

}  // namespace fixtures
