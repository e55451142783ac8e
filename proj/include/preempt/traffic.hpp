#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "preempt/graph.hpp"
#include "preempt/random.hpp"

namespace preempt {

/// An admitted connection.
struct Flow {
  int id = 0;
  int priority_class = 1;
  double bandwidth = 0.0;  // Mbps
  Route path;
};

/// Stationary snapshot traffic model. Arrival/departure rates are carried for
/// completeness but the sampler populates the network directly: preemption
/// operates on a snapshot, not on queueing dynamics.
struct TrafficConfig {
  std::map<int, std::pair<double, double>> class_bandwidth;  // class -> [lo, hi] Mbps
  std::map<int, double> arrival_rates;                       // class -> lambda
  std::map<int, double> departure_rates;                     // class -> mu
  double target_load = 0.98;      // stop at this mean link utilization
  int flow_count = -1;            // if >= 0, stop after exactly this many admissions
  int rejection_streak = 200;     // saturation detector
  bool single_path_routing = false;  // true: one deterministic path per S-D pair
  std::uint64_t seed = 0;

  void validate() const {
    if (class_bandwidth.empty()) throw std::invalid_argument("no traffic classes configured");
    for (const auto& [cls, range] : class_bandwidth) {
      (void)cls;
      if (range.first <= 0.0 || range.second < range.first)
        throw std::invalid_argument("class bandwidth range must satisfy 0 < lo <= hi");
    }
    for (const auto& [cls, r] : arrival_rates)
      if (r <= 0.0) throw std::invalid_argument("arrival rates must be > 0");
    for (const auto& [cls, r] : departure_rates)
      if (r <= 0.0) throw std::invalid_argument("departure rates must be > 0");
    if (target_load <= 0.0 || target_load > 1.0)
      throw std::invalid_argument("target_load must be in (0, 1]");
    if (rejection_streak < 1) throw std::invalid_argument("rejection_streak must be >= 1");
  }
};

/// Populates the topology with flows: random S-D pair, class and bandwidth,
/// routed uniformly among shortest paths, admitted only if every path link has
/// residual capacity. Stops at the target load, a configured admission count,
/// or after `rejection_streak` consecutive rejections. Classes are drawn
/// uniformly unless arrival/departure rates are configured, in which case the
/// draw follows the offered intensity lambda/mu of each class.
inline std::vector<Flow> generate_network_flows(const Topology& t, const TrafficConfig& cfg) {
  cfg.validate();
  if (cfg.flow_count == 0) return {};
  auto rng = make_rng(cfg.seed);
  ShortestPathSampler sampler(t);

  std::vector<double> residual(t.edges().size());
  double total_capacity = 0.0;
  for (size_t e = 0; e < t.edges().size(); ++e) {
    residual[e] = t.capacity(static_cast<int>(e));
    total_capacity += residual[e];
  }
  double used = 0.0;

  std::vector<int> classes;
  std::vector<double> class_cdf;
  double intensity_sum = 0.0;
  for (const auto& [cls, range] : cfg.class_bandwidth) {
    (void)range;
    classes.push_back(cls);
    double w = 1.0;
    if (cfg.arrival_rates.count(cls) && cfg.departure_rates.count(cls))
      w = cfg.arrival_rates.at(cls) / cfg.departure_rates.at(cls);
    intensity_sum += w;
    class_cdf.push_back(intensity_sum);
  }

  std::vector<Flow> flows;
  int rejections = 0;
  while (rejections < cfg.rejection_streak) {
    if (cfg.flow_count >= 0 && static_cast<int>(flows.size()) >= cfg.flow_count) break;
    if (cfg.flow_count < 0 && used / total_capacity >= cfg.target_load) break;

    NodeId s = static_cast<NodeId>(uniform_index(rng, static_cast<std::uint64_t>(t.node_count())));
    NodeId d = static_cast<NodeId>(
        uniform_index(rng, static_cast<std::uint64_t>(t.node_count() - 1)));
    if (d >= s) ++d;
    const double pick = uniform_unit(rng) * intensity_sum;
    int cls = classes.back();
    for (size_t c = 0; c < classes.size(); ++c)
      if (pick < class_cdf[c]) {
        cls = classes[c];
        break;
      }
    const auto& range = cfg.class_bandwidth.at(cls);
    double bw = uniform_real(rng, range.first, range.second);
    Route path =
        cfg.single_path_routing ? shortest_path(t, s, d) : sampler.sample(s, d, rng);

    bool fits = true;
    for (int e : path.links)
      if (residual[static_cast<size_t>(e)] < bw) {
        fits = false;
        break;
      }
    if (!fits) {
      ++rejections;
      continue;
    }
    rejections = 0;
    for (int e : path.links) residual[static_cast<size_t>(e)] -= bw;
    used += bw * path.hops();
    Flow f;
    f.id = static_cast<int>(flows.size());
    f.priority_class = cls;
    f.bandwidth = bw;
    f.path = std::move(path);
    flows.push_back(std::move(f));
  }
  return flows;
}

/// Synthetic flow pattern on an abstract route with controlled continuity
/// probability. Node ids in the generated paths are route positions 0..L.
struct RouteTrafficSpec {
  int route_hops = 10;            // L
  double p_c = 1.0 / 3.0;         // per-hop continuation probability
  double b0 = 10.0;               // nominal bandwidth
  double eps_b = 0.0;             // relative spread, bandwidths in B0*(1 +/- eps_b)
  double flows_per_link = 4.0;    // target per-link flow count
  std::uint64_t seed = 0;

  void validate() const {
    if (route_hops < 1) throw std::invalid_argument("route must have at least one link");
    if (p_c < 0.0 || p_c >= 1.0) throw std::invalid_argument("p_c must be in [0, 1)");
    if (b0 <= 0.0) throw std::invalid_argument("B0 must be > 0");
    if (eps_b < 0.0 || eps_b >= 1.0) throw std::invalid_argument("eps_B must be in [0, 1)");
    if (flows_per_link <= 0.0) throw std::invalid_argument("flows_per_link must be > 0");
  }
};

/// Each flow enters the route at a uniformly random link, then keeps extending
/// by one more link with probability p_c, truncated at the route end. The
/// total count is sized so the expected per-link flow count hits the target
/// under the untruncated geometric span 1/(1-p_c).
inline std::vector<Flow> generate_route_flows(const RouteTrafficSpec& spec) {
  spec.validate();
  auto rng = make_rng(spec.seed);
  const int L = spec.route_hops;
  const int total =
      std::max(1, static_cast<int>(std::lround(spec.flows_per_link * L * (1.0 - spec.p_c))));
  std::vector<Flow> flows;
  flows.reserve(static_cast<size_t>(total));
  for (int k = 0; k < total; ++k) {
    int lo = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(L)));
    int hi = lo;
    while (hi + 1 < L && chance(rng, spec.p_c)) ++hi;
    Flow f;
    f.id = k;
    f.priority_class = 1;
    f.bandwidth = uniform_real(rng, spec.b0 * (1.0 - spec.eps_b), spec.b0 * (1.0 + spec.eps_b));
    for (int n = lo; n <= hi + 1; ++n) f.path.nodes.push_back(n);
    for (int l = lo; l <= hi; ++l) f.path.links.push_back(l);
    flows.push_back(std::move(f));
  }
  return flows;
}

struct LinkDependencyEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  int runs = 0;
};

using RouteFilter = std::function<bool(const Topology&, NodeId, NodeId)>;

/// Monte-Carlo estimate of the link-dependency probability: among sampled
/// shortest-path flows that touch route link i (with the partner link i+h
/// still on the route), the fraction that also touch link i+h. Averaged over
/// independent runs, each with a fresh random route of `route_hops` hops.
/// An optional filter restricts which S-D pairs may host the route.
inline std::map<int, LinkDependencyEstimate> empirical_link_dependency(
    const Topology& t, int samples, int runs, std::uint64_t seed, int route_hops = 10,
    const RouteFilter& route_filter = {}) {
  if (samples < 1 || runs < 1) throw std::invalid_argument("samples and runs must be >= 1");
  if (!t.connected()) throw std::invalid_argument("topology must be connected");
  const int L = route_hops;
  ShortestPathSampler sampler(t);
  std::vector<std::vector<double>> per_run(static_cast<size_t>(L));

  for (int r = 0; r < runs; ++r) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(r));
    // Random route of exactly route_hops hops.
    Route route;
    bool found = false;
    for (int attempt = 0; attempt < 100000; ++attempt) {
      NodeId s =
          static_cast<NodeId>(uniform_index(rng, static_cast<std::uint64_t>(t.node_count())));
      NodeId d = static_cast<NodeId>(
          uniform_index(rng, static_cast<std::uint64_t>(t.node_count() - 1)));
      if (d >= s) ++d;
      if (sampler.distance(s, d) != route_hops) continue;
      if (route_filter && !route_filter(t, s, d)) continue;
      route = sampler.sample(s, d, rng);
      found = true;
      break;
    }
    if (!found) throw std::runtime_error("no node pair at the requested route length");
    std::map<int, int> on_route;  // edge id -> route position
    for (int i = 0; i < L; ++i) on_route[route.links[static_cast<size_t>(i)]] = i;

    std::vector<std::int64_t> num(static_cast<size_t>(L), 0), den(static_cast<size_t>(L), 0);
    std::vector<char> touched(static_cast<size_t>(L), 0);
    for (int n = 0; n < samples; ++n) {
      NodeId s =
          static_cast<NodeId>(uniform_index(rng, static_cast<std::uint64_t>(t.node_count())));
      NodeId d = static_cast<NodeId>(
          uniform_index(rng, static_cast<std::uint64_t>(t.node_count() - 1)));
      if (d >= s) ++d;
      Route path = sampler.sample(s, d, rng);
      std::fill(touched.begin(), touched.end(), 0);
      bool any = false;
      for (int e : path.links) {
        auto it = on_route.find(e);
        if (it != on_route.end()) {
          touched[static_cast<size_t>(it->second)] = 1;
          any = true;
        }
      }
      if (!any) continue;
      for (int h = 0; h < L; ++h)
        for (int i = 0; i + h < L; ++i)
          if (touched[static_cast<size_t>(i)]) {
            ++den[static_cast<size_t>(h)];
            if (touched[static_cast<size_t>(i + h)]) ++num[static_cast<size_t>(h)];
          }
    }
    for (int h = 0; h < L; ++h)
      if (den[static_cast<size_t>(h)] > 0)
        per_run[static_cast<size_t>(h)].push_back(
            static_cast<double>(num[static_cast<size_t>(h)]) /
            static_cast<double>(den[static_cast<size_t>(h)]));
  }

  std::map<int, LinkDependencyEstimate> result;
  for (int h = 0; h < L; ++h) {
    const auto& vals = per_run[static_cast<size_t>(h)];
    if (vals.empty()) continue;
    LinkDependencyEstimate est;
    est.runs = static_cast<int>(vals.size());
    for (double v : vals) est.mean += v;
    est.mean /= est.runs;
    if (est.runs > 1) {
      double ss = 0.0;
      for (double v : vals) ss += (v - est.mean) * (v - est.mean);
      est.stderr_ = std::sqrt(ss / (est.runs - 1)) / std::sqrt(static_cast<double>(est.runs));
    }
    result[h] = est;
  }
  return result;
}

// --- JSON lines: one flow per record {id, class, bandwidth, path:[node ids]} ---

inline nlohmann::json to_json(const Flow& f) {
  return {{"id", f.id},
          {"class", f.priority_class},
          {"bandwidth", f.bandwidth},
          {"path", f.path.nodes}};
}

/// Parses one flow record. With a topology, path links are resolved against
/// its edges; without one the nodes are treated as positions along an abstract
/// route and links numbered accordingly.
inline Flow flow_from_json(const nlohmann::json& j, const Topology* t = nullptr) {
  Flow f;
  f.id = j.at("id").get<int>();
  f.priority_class = j.at("class").get<int>();
  f.bandwidth = j.at("bandwidth").get<double>();
  f.path.nodes = j.at("path").get<std::vector<NodeId>>();
  for (size_t i = 0; i + 1 < f.path.nodes.size(); ++i) {
    if (t) {
      int e = t->edge_between(f.path.nodes[i], f.path.nodes[i + 1]);
      if (e < 0) throw std::invalid_argument("flow path uses a non-existent edge");
      f.path.links.push_back(e);
    } else {
      f.path.links.push_back(std::min(f.path.nodes[i], f.path.nodes[i + 1]));
    }
  }
  return f;
}

inline std::string flows_to_jsonl(const std::vector<Flow>& flows) {
  std::string out;
  for (const Flow& f : flows) {
    out += to_json(f).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<Flow> flows_from_jsonl(const std::string& text, const Topology* t = nullptr) {
  std::vector<Flow> flows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    flows.push_back(flow_from_json(nlohmann::json::parse(line), t));
  }
  return flows;
}

}  // namespace preempt
