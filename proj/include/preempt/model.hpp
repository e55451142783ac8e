#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "preempt/graph.hpp"
#include "preempt/traffic.hpp"

namespace preempt {

/// A preemptible flow restricted to the route of the new call. `span` is the
/// contiguous interval of route links (0-based, inclusive) the flow occupies.
/// `source_id` tracks the original network flow when an overlap had to be
/// split into pieces; otherwise it equals `id`.
struct RouteFlow {
  int id = 0;
  int source_id = 0;
  int priority_class = 1;
  double bandwidth = 0.0;
  int span_lo = 0;
  int span_hi = 0;

  int span_len() const { return span_hi - span_lo + 1; }
  bool on_link(int link) const { return link >= span_lo && link <= span_hi; }
};

/// Self-contained preemption problem on one route: which lower-priority flows
/// to remove so that every link can fit the new call.
struct PreemptionInstance {
  int link_count = 0;                 // L
  std::vector<RouteFlow> flows;       // S_F, preemptible flows only
  std::vector<double> free_bw;        // unused bandwidth per link
  double new_call_bw = 0.0;           // c_new
  int new_call_class = 2;             // i_new
  std::map<int, double> alpha;        // class -> priority weight
  double beta = 0.0;                  // constraint penalty multiplier
  double t0 = 3.0;                    // default sampler temperature

  double weight(const RouteFlow& f) const { return alpha.at(f.priority_class) * f.bandwidth; }

  int max_flows_per_link() const {
    std::vector<int> per_link(static_cast<size_t>(link_count), 0);
    for (const auto& f : flows)
      for (int i = f.span_lo; i <= f.span_hi; ++i) ++per_link[static_cast<size_t>(i)];
    int fmax = 0;
    for (int c : per_link) fmax = std::max(fmax, c);
    return fmax;
  }

  int incidence_count() const {
    int n = 0;
    for (const auto& f : flows) n += f.span_len();
    return n;
  }

  void validate() const {
    if (link_count < 1) throw std::invalid_argument("instance must have at least one link");
    if (new_call_bw <= 0.0) throw std::invalid_argument("new-call demand must be > 0");
    if (beta <= 0.0) throw std::invalid_argument("beta must be > 0");
    if (static_cast<int>(free_bw.size()) != link_count)
      throw std::invalid_argument("free_bw size must equal link count");
    for (double b : free_bw)
      if (b < 0.0) throw std::invalid_argument("free bandwidth must be >= 0");
    for (const auto& f : flows) {
      if (f.bandwidth <= 0.0) throw std::invalid_argument("flow bandwidth must be > 0");
      if (f.span_lo < 0 || f.span_hi >= link_count || f.span_lo > f.span_hi)
        throw std::invalid_argument("flow span outside route");
      if (!alpha.count(f.priority_class))
        throw std::invalid_argument("missing alpha weight for class");
    }
    double prev = 0.0;  // weights must rise with the priority class
    for (const auto& [cls, w] : alpha) {
      (void)cls;
      if (w <= prev) throw std::invalid_argument("alpha weights must increase with class");
      prev = w;
    }
  }
};

/// beta default: twice the cost of preempting everything, so one constraint
/// violation outweighs any preemption pattern.
inline double default_beta(const PreemptionInstance& inst) {
  double total = 0.0;
  for (const auto& f : inst.flows) total += inst.weight(f);
  return total > 0.0 ? 2.0 * total : 1.0;
}

/// Per-(link, flow) binary decisions, stored per flow over its span.
class DecisionMatrix {
 public:
  DecisionMatrix() = default;
  explicit DecisionMatrix(const PreemptionInstance& inst) {
    bits_.reserve(inst.flows.size());
    for (const auto& f : inst.flows)
      bits_.emplace_back(static_cast<size_t>(f.span_len()), 0);
  }

  int get(const RouteFlow& f, int flow_idx, int link) const {
    return bits_[static_cast<size_t>(flow_idx)][static_cast<size_t>(link - f.span_lo)];
  }
  void set(const RouteFlow& f, int flow_idx, int link, int value) {
    bits_[static_cast<size_t>(flow_idx)][static_cast<size_t>(link - f.span_lo)] =
        static_cast<std::uint8_t>(value);
  }
  const std::vector<std::uint8_t>& row(int flow_idx) const {
    return bits_[static_cast<size_t>(flow_idx)];
  }
  size_t flow_count() const { return bits_.size(); }
  bool operator==(const DecisionMatrix&) const = default;

 private:
  std::vector<std::vector<std::uint8_t>> bits_;
};

using GlobalDecision = std::vector<std::uint8_t>;  // d^k per flow

/// OR rule: a flow is preempted if at least one link on its span says so.
inline GlobalDecision global_decision(const PreemptionInstance& inst, const DecisionMatrix& d) {
  GlobalDecision g(inst.flows.size(), 0);
  for (size_t k = 0; k < inst.flows.size(); ++k)
    for (std::uint8_t b : d.row(static_cast<int>(k)))
      if (b) {
        g[k] = 1;
        break;
      }
  return g;
}

/// Consistent matrix induced by a global decision: every entry of a preempted
/// flow set to 1, everything else 0.
inline DecisionMatrix propagate(const PreemptionInstance& inst, const GlobalDecision& g) {
  DecisionMatrix d(inst);
  for (size_t k = 0; k < inst.flows.size(); ++k)
    if (g[k])
      for (int i = inst.flows[k].span_lo; i <= inst.flows[k].span_hi; ++i)
        d.set(inst.flows[k], static_cast<int>(k), i, 1);
  return d;
}

/// Weighted preempted bandwidth: sum over flows of alpha_k * B^k * d^k.
inline double objective(const PreemptionInstance& inst, const GlobalDecision& g) {
  double cost = 0.0;
  for (size_t k = 0; k < inst.flows.size(); ++k)
    if (g[k]) cost += inst.weight(inst.flows[k]);
  return cost;
}

/// A_i: bandwidth available to the new call at `link` — unused bandwidth plus
/// bandwidth of flows preempted there. Accumulation order is fixed (flow index
/// ascending) so every energy routine sees bit-identical sums.
inline double available_bandwidth(const PreemptionInstance& inst, const DecisionMatrix& d,
                                  int link) {
  double a = inst.free_bw[static_cast<size_t>(link)];
  for (size_t k = 0; k < inst.flows.size(); ++k) {
    const RouteFlow& f = inst.flows[k];
    if (f.on_link(link) && d.get(f, static_cast<int>(k), link)) a += f.bandwidth;
  }
  return a;
}

/// Capacity-violation indicator: 1 when the new call does not fit (x > 0).
inline double step_violation(double x) { return x > 0.0 ? 1.0 : 0.0; }

/// Exact energy. Flow terms use the closed product form
/// alpha_k B^k (1 - prod(1 - d_i^k)); the beta term penalizes every link where
/// the preempted-plus-free bandwidth still cannot fit the new call.
inline double hamiltonian(const PreemptionInstance& inst, const DecisionMatrix& d) {
  double h = 0.0;
  for (size_t k = 0; k < inst.flows.size(); ++k) {
    bool any = false;
    for (std::uint8_t b : d.row(static_cast<int>(k)))
      if (b) {
        any = true;
        break;
      }
    if (any) h += inst.weight(inst.flows[k]);
  }
  for (int i = 0; i < inst.link_count; ++i)
    h += inst.beta * step_violation(inst.new_call_bw - available_bandwidth(inst, d, i));
  return h;
}

/// Literal inclusion-exclusion expansion of the flow terms (sum over non-empty
/// subsets of each span with alternating sign). Cross-check oracle for
/// `hamiltonian`; refuses spans beyond 20 links.
inline double hamiltonian_expanded(const PreemptionInstance& inst, const DecisionMatrix& d) {
  double h = 0.0;
  for (size_t k = 0; k < inst.flows.size(); ++k) {
    const RouteFlow& f = inst.flows[k];
    const int len = f.span_len();
    if (len > 20) throw std::invalid_argument("span too large for expanded form");
    const auto& row = d.row(static_cast<int>(k));
    double term = 0.0;
    for (std::uint32_t subset = 1; subset < (1u << len); ++subset) {
      int prod = 1;
      for (int b = 0; b < len && prod; ++b)
        if (subset & (1u << b)) prod &= row[static_cast<size_t>(b)];
      if (!prod) continue;
      term += (std::popcount(subset) % 2 == 1) ? 1.0 : -1.0;
    }
    h += inst.weight(f) * term;
  }
  for (int i = 0; i < inst.link_count; ++i)
    h += inst.beta * step_violation(inst.new_call_bw - available_bandwidth(inst, d, i));
  return h;
}

/// Truncated energy of the Markov Random Field approximation: first-order
/// terms plus pairwise interactions between links at most `n_d` hops apart.
/// Each unordered link pair contributes once, which keeps the sampler's local
/// conditional exact and makes the truncation lossless for spans <= 2.
inline double local_hamiltonian(const PreemptionInstance& inst, const DecisionMatrix& d,
                                int n_d) {
  if (n_d < 0) throw std::invalid_argument("neighborhood size must be >= 0");
  double h = 0.0;
  for (size_t k = 0; k < inst.flows.size(); ++k) {
    const RouteFlow& f = inst.flows[k];
    const auto& row = d.row(static_cast<int>(k));
    const int len = f.span_len();
    double first = 0.0, second = 0.0;
    for (int a = 0; a < len; ++a) {
      if (!row[static_cast<size_t>(a)]) continue;
      first += 1.0;
      for (int b = a + 1; b < len && b - a <= n_d; ++b)
        if (row[static_cast<size_t>(b)]) second += 1.0;
    }
    h += inst.weight(f) * (first - second);
  }
  for (int i = 0; i < inst.link_count; ++i)
    h += inst.beta * step_violation(inst.new_call_bw - available_bandwidth(inst, d, i));
  return h;
}

/// true iff every link can accommodate the new call under decisions `d`.
inline bool feasible(const PreemptionInstance& inst, const DecisionMatrix& d) {
  for (int i = 0; i < inst.link_count; ++i)
    if (available_bandwidth(inst, d, i) < inst.new_call_bw) return false;
  return true;
}

/// Feasibility of a global decision, i.e. of its propagated matrix.
inline bool feasible(const PreemptionInstance& inst, const GlobalDecision& g) {
  return feasible(inst, propagate(inst, g));
}

/// Per flow, whether all links on its span agree.
inline std::vector<bool> consistency(const PreemptionInstance& inst, const DecisionMatrix& d) {
  std::vector<bool> ok(inst.flows.size(), true);
  for (size_t k = 0; k < inst.flows.size(); ++k) {
    const auto& row = d.row(static_cast<int>(k));
    for (std::uint8_t b : row)
      if (b != row[0]) {
        ok[k] = false;
        break;
      }
  }
  return ok;
}

/// Builds the optimization instance for a new call on `route`. Free bandwidth
/// per link is capacity minus the load of every admitted flow there; the flow
/// list keeps only strictly-lower-class flows sharing at least one route link.
/// A flow overlapping the route in disjoint stretches is split into one
/// RouteFlow per stretch (same source_id).
inline PreemptionInstance extract_instance(const Topology& t, const std::vector<Flow>& flows,
                                           const Route& route, double c_new, int i_new,
                                           std::map<int, double> alpha, double beta = 0.0) {
  const int L = route.hops();
  if (L < 1) throw std::invalid_argument("route must have at least one link");
  std::map<int, int> link_index;  // edge id -> route position
  for (int i = 0; i < L; ++i) link_index[route.links[static_cast<size_t>(i)]] = i;

  PreemptionInstance inst;
  inst.link_count = L;
  inst.new_call_bw = c_new;
  inst.new_call_class = i_new;
  inst.alpha = std::move(alpha);

  inst.free_bw.assign(static_cast<size_t>(L), 0.0);
  for (int i = 0; i < L; ++i)
    inst.free_bw[static_cast<size_t>(i)] = t.capacity(route.links[static_cast<size_t>(i)]);
  for (const Flow& f : flows)
    for (int e : f.path.links) {
      auto it = link_index.find(e);
      if (it != link_index.end()) inst.free_bw[static_cast<size_t>(it->second)] -= f.bandwidth;
    }
  for (double& b : inst.free_bw) b = std::max(0.0, b);

  // Sort overlapping route positions per flow, then split into contiguous runs.
  int next_id = 0;
  for (const Flow& f : flows) {
    if (f.priority_class >= i_new) continue;
    std::vector<int> hits;
    for (int e : f.path.links) {
      auto it = link_index.find(e);
      if (it != link_index.end()) hits.push_back(it->second);
    }
    if (hits.empty()) continue;
    std::sort(hits.begin(), hits.end());
    size_t start = 0;
    for (size_t j = 1; j <= hits.size(); ++j) {
      if (j == hits.size() || hits[j] != hits[j - 1] + 1) {
        RouteFlow rf;
        rf.id = next_id++;
        rf.source_id = f.id;
        rf.priority_class = f.priority_class;
        rf.bandwidth = f.bandwidth;
        rf.span_lo = hits[start];
        rf.span_hi = hits[j - 1];
        inst.flows.push_back(rf);
        start = j;
      }
    }
  }

  inst.beta = beta > 0.0 ? beta : default_beta(inst);
  inst.validate();
  return inst;
}

/// Instance from route-local flows (paths expressed as route positions), as
/// produced by generate_route_flows. All such flows are preemptible.
inline PreemptionInstance make_route_instance(int link_count, const std::vector<Flow>& flows,
                                              std::vector<double> free_bw, double c_new,
                                              int i_new, std::map<int, double> alpha,
                                              double beta = 0.0) {
  PreemptionInstance inst;
  inst.link_count = link_count;
  inst.free_bw = std::move(free_bw);
  inst.new_call_bw = c_new;
  inst.new_call_class = i_new;
  inst.alpha = std::move(alpha);
  for (const Flow& f : flows) {
    if (f.priority_class >= i_new) continue;
    RouteFlow rf;
    rf.id = static_cast<int>(inst.flows.size());
    rf.source_id = f.id;
    rf.priority_class = f.priority_class;
    rf.bandwidth = f.bandwidth;
    rf.span_lo = f.path.links.front();
    rf.span_hi = f.path.links.back();
    inst.flows.push_back(rf);
  }
  inst.beta = beta > 0.0 ? beta : default_beta(inst);
  inst.validate();
  return inst;
}

// --- JSON round-trip:
// {L, flows:[{k, class, B, span:[lo,hi]}], free_bw, c_new, i_new, alpha, beta} ---

inline nlohmann::json to_json(const PreemptionInstance& inst) {
  nlohmann::json j;
  j["L"] = inst.link_count;
  auto& jf = j["flows"] = nlohmann::json::array();
  for (const auto& f : inst.flows) {
    nlohmann::json e{{"k", f.id},
                     {"class", f.priority_class},
                     {"B", f.bandwidth},
                     {"span", {f.span_lo, f.span_hi}}};
    if (f.source_id != f.id) e["source"] = f.source_id;
    jf.push_back(e);
  }
  j["free_bw"] = inst.free_bw;
  j["c_new"] = inst.new_call_bw;
  j["i_new"] = inst.new_call_class;
  auto& ja = j["alpha"] = nlohmann::json::object();
  for (const auto& [cls, w] : inst.alpha) ja[std::to_string(cls)] = w;
  j["beta"] = inst.beta;
  j["T0"] = inst.t0;
  return j;
}

inline PreemptionInstance instance_from_json(const nlohmann::json& j) {
  PreemptionInstance inst;
  inst.link_count = j.at("L").get<int>();
  for (const auto& e : j.at("flows")) {
    RouteFlow f;
    f.id = e.at("k").get<int>();
    f.source_id = e.value("source", f.id);
    f.priority_class = e.at("class").get<int>();
    f.bandwidth = e.at("B").get<double>();
    f.span_lo = e.at("span").at(0).get<int>();
    f.span_hi = e.at("span").at(1).get<int>();
    inst.flows.push_back(f);
  }
  inst.free_bw = j.at("free_bw").get<std::vector<double>>();
  inst.new_call_bw = j.at("c_new").get<double>();
  inst.new_call_class = j.at("i_new").get<int>();
  for (const auto& [key, w] : j.at("alpha").items()) inst.alpha[std::stoi(key)] = w.get<double>();
  inst.beta = j.value("beta", 0.0);
  if (inst.beta <= 0.0) inst.beta = default_beta(inst);
  inst.t0 = j.value("T0", 3.0);
  inst.validate();
  return inst;
}

}  // namespace preempt
