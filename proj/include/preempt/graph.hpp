#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "preempt/random.hpp"

namespace preempt {

using NodeId = int;

struct Edge {
  NodeId u = 0;  // u < v always
  NodeId v = 0;

  Edge() = default;
  Edge(NodeId a, NodeId b) : u(std::min(a, b)), v(std::max(a, b)) {}
  bool operator==(const Edge&) const = default;
};

enum class TopologyKind { lattice, power_law, custom };

/// Undirected capacitated network. Immutable after construction; safe to
/// share read-only across threads.
class Topology {
 public:
  Topology() = default;

  Topology(int node_count, std::vector<Edge> edges, std::vector<double> capacity,
           TopologyKind kind = TopologyKind::custom)
      : node_count_(node_count),
        edges_(std::move(edges)),
        capacity_(std::move(capacity)),
        kind_(kind) {
    if (capacity_.size() != edges_.size())
      throw std::invalid_argument("capacity list must match edge list");
    for (double c : capacity_)
      if (c <= 0.0) throw std::invalid_argument("edge capacity must be > 0");
    build_adjacency();
  }

  int node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  double capacity(int edge_id) const { return capacity_[edge_id]; }
  TopologyKind kind() const { return kind_; }

  /// Neighbors of `u` as (node, edge id), sorted by node id.
  const std::vector<std::pair<NodeId, int>>& neighbors(NodeId u) const {
    return adjacency_[static_cast<size_t>(u)];
  }

  int edge_between(NodeId a, NodeId b) const {
    for (const auto& [n, e] : adjacency_[static_cast<size_t>(a)])
      if (n == b) return e;
    return -1;
  }

  int degree(NodeId u) const { return static_cast<int>(neighbors(u).size()); }

  bool connected() const {
    if (node_count_ == 0) return false;
    std::vector<char> seen(static_cast<size_t>(node_count_), 0);
    std::deque<NodeId> queue{0};
    seen[0] = 1;
    int reached = 1;
    while (!queue.empty()) {
      NodeId u = queue.front();
      queue.pop_front();
      for (const auto& [v, e] : neighbors(u)) {
        (void)e;
        if (!seen[static_cast<size_t>(v)]) {
          seen[static_cast<size_t>(v)] = 1;
          ++reached;
          queue.push_back(v);
        }
      }
    }
    return reached == node_count_;
  }

  // Metadata for generated kinds, kept for serialization round-trips.
  int lattice_rows = 0, lattice_cols = 0;
  int pl_n = 0, pl_m = 0;
  std::uint64_t pl_seed = 0;

 private:
  void build_adjacency() {
    adjacency_.assign(static_cast<size_t>(node_count_), {});
    for (size_t i = 0; i < edges_.size(); ++i) {
      const Edge& e = edges_[i];
      if (e.u < 0 || e.v >= node_count_)
        throw std::invalid_argument("edge endpoint out of range");
      adjacency_[static_cast<size_t>(e.u)].emplace_back(e.v, static_cast<int>(i));
      adjacency_[static_cast<size_t>(e.v)].emplace_back(e.u, static_cast<int>(i));
    }
    for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
  }

  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> capacity_;
  TopologyKind kind_ = TopologyKind::custom;
  std::vector<std::vector<std::pair<NodeId, int>>> adjacency_;
};

/// Simple path: ordered node list plus the edge ids connecting them.
struct Route {
  std::vector<NodeId> nodes;
  std::vector<int> links;  // links[i] joins nodes[i] and nodes[i+1]

  int hops() const { return static_cast<int>(links.size()); }
};

/// rows x cols grid with horizontal/vertical edges, all capacities equal.
inline Topology build_lattice(int rows, int cols, double capacity) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("lattice dimensions must be >= 2");
  if (capacity <= 0.0) throw std::invalid_argument("capacity must be > 0");
  std::vector<Edge> edges;
  edges.reserve(static_cast<size_t>(rows * (cols - 1) + cols * (rows - 1)));
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  Topology t(rows * cols, std::move(edges),
             std::vector<double>(static_cast<size_t>(rows * (cols - 1) + cols * (rows - 1)), capacity),
             TopologyKind::lattice);
  t.lattice_rows = rows;
  t.lattice_cols = cols;
  return t;
}

/// Preferential-attachment graph: an (m+1)-clique seed, then each new node
/// attaches m edges to distinct existing nodes with degree-proportional
/// probability. Deterministic for a fixed seed.
inline Topology build_power_law(int n, int m, std::uint64_t seed, double capacity = 100.0) {
  if (m < 1 || n <= m) throw std::invalid_argument("power-law generator requires n > m >= 1");
  if (capacity <= 0.0) throw std::invalid_argument("capacity must be > 0");
  auto rng = make_rng(seed);
  std::vector<Edge> edges;
  std::vector<NodeId> stubs;  // one entry per edge endpoint
  const int clique = m + 1;
  for (int i = 0; i < clique; ++i)
    for (int j = i + 1; j < clique; ++j) {
      edges.emplace_back(i, j);
      stubs.push_back(i);
      stubs.push_back(j);
    }
  std::vector<char> picked(static_cast<size_t>(n), 0);
  for (int node = clique; node < n; ++node) {
    std::vector<NodeId> targets;
    while (static_cast<int>(targets.size()) < m) {
      NodeId cand = stubs[uniform_index(rng, stubs.size())];
      if (!picked[static_cast<size_t>(cand)]) {
        picked[static_cast<size_t>(cand)] = 1;
        targets.push_back(cand);
      }
    }
    for (NodeId t : targets) {
      picked[static_cast<size_t>(t)] = 0;
      edges.emplace_back(node, t);
      stubs.push_back(node);
      stubs.push_back(t);
    }
  }
  const size_t edge_count = edges.size();
  Topology t(n, std::move(edges), std::vector<double>(edge_count, capacity),
             TopologyKind::power_law);
  t.pl_n = n;
  t.pl_m = m;
  t.pl_seed = seed;
  return t;
}

namespace detail {

/// BFS distances from `src`; unreachable nodes get -1.
inline std::vector<int> bfs_distances(const Topology& t, NodeId src) {
  std::vector<int> dist(static_cast<size_t>(t.node_count()), -1);
  std::deque<NodeId> queue{src};
  dist[static_cast<size_t>(src)] = 0;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (const auto& [v, e] : t.neighbors(u)) {
      (void)e;
      if (dist[static_cast<size_t>(v)] < 0) {
        dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(u)] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

inline void check_node(const Topology& t, NodeId x, const char* what) {
  if (x < 0 || x >= t.node_count())
    throw std::invalid_argument(std::string(what) + " node out of range");
}

}  // namespace detail

/// Minimum-hop simple path. Ties broken by taking the lexicographically
/// smallest next-node id at every step, so repeated queries are identical.
inline Route shortest_path(const Topology& t, NodeId s, NodeId d) {
  detail::check_node(t, s, "source");
  detail::check_node(t, d, "destination");
  if (s == d) throw std::invalid_argument("source and destination must differ");
  const auto dist = detail::bfs_distances(t, d);
  if (dist[static_cast<size_t>(s)] < 0)
    throw std::runtime_error("no route: nodes are disconnected");
  Route r;
  r.nodes.push_back(s);
  NodeId cur = s;
  while (cur != d) {
    const int dc = dist[static_cast<size_t>(cur)];
    for (const auto& [v, e] : t.neighbors(cur)) {  // sorted, so first hit is smallest id
      if (dist[static_cast<size_t>(v)] == dc - 1) {
        r.nodes.push_back(v);
        r.links.push_back(e);
        cur = v;
        break;
      }
    }
  }
  return r;
}

/// Exact number of distinct minimum-hop paths between s and d
/// (BFS layering with path-count accumulation).
inline std::uint64_t count_shortest_paths(const Topology& t, NodeId s, NodeId d) {
  detail::check_node(t, s, "source");
  detail::check_node(t, d, "destination");
  if (s == d) return 1;
  const auto dist = detail::bfs_distances(t, s);
  if (dist[static_cast<size_t>(d)] < 0) return 0;
  // Process nodes by increasing BFS layer.
  std::vector<NodeId> order(static_cast<size_t>(t.node_count()));
  for (int i = 0; i < t.node_count(); ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return dist[static_cast<size_t>(a)] < dist[static_cast<size_t>(b)];
  });
  std::vector<std::uint64_t> count(static_cast<size_t>(t.node_count()), 0);
  count[static_cast<size_t>(s)] = 1;
  for (NodeId u : order) {
    if (dist[static_cast<size_t>(u)] < 0 || count[static_cast<size_t>(u)] == 0) continue;
    for (const auto& [v, e] : t.neighbors(u)) {
      (void)e;
      if (dist[static_cast<size_t>(v)] == dist[static_cast<size_t>(u)] + 1)
        count[static_cast<size_t>(v)] += count[static_cast<size_t>(u)];
    }
  }
  return count[static_cast<size_t>(d)];
}

/// Memoizes per-destination BFS tables so repeated path samples toward the
/// same destinations stay cheap. Holds a reference; the topology must outlive
/// the sampler.
class ShortestPathSampler {
 public:
  explicit ShortestPathSampler(const Topology& t)
      : t_(t), dist_(static_cast<size_t>(t.node_count())),
        count_(static_cast<size_t>(t.node_count())) {}

  int distance(NodeId s, NodeId d) {
    ensure(d);
    return dist_[static_cast<size_t>(d)][static_cast<size_t>(s)];
  }

  /// Uniform draw among all minimum-hop paths from s to d.
  Route sample(NodeId s, NodeId d, std::mt19937_64& rng) {
    detail::check_node(t_, s, "source");
    detail::check_node(t_, d, "destination");
    if (s == d) throw std::invalid_argument("source and destination must differ");
    ensure(d);
    const auto& dist = dist_[static_cast<size_t>(d)];
    const auto& count = count_[static_cast<size_t>(d)];
    if (dist[static_cast<size_t>(s)] < 0)
      throw std::runtime_error("no route: nodes are disconnected");
    Route r;
    r.nodes.push_back(s);
    NodeId cur = s;
    while (cur != d) {
      double total = 0.0;
      for (const auto& [v, e] : t_.neighbors(cur)) {
        (void)e;
        if (dist[static_cast<size_t>(v)] == dist[static_cast<size_t>(cur)] - 1)
          total += count[static_cast<size_t>(v)];
      }
      double pick = uniform_unit(rng) * total;
      NodeId next = -1;
      int next_edge = -1;
      for (const auto& [v, e] : t_.neighbors(cur)) {
        if (dist[static_cast<size_t>(v)] != dist[static_cast<size_t>(cur)] - 1) continue;
        pick -= count[static_cast<size_t>(v)];
        next = v;
        next_edge = e;
        if (pick < 0.0) break;
      }
      r.nodes.push_back(next);
      r.links.push_back(next_edge);
      cur = next;
    }
    return r;
  }

 private:
  void ensure(NodeId d) {
    auto& dist = dist_[static_cast<size_t>(d)];
    if (!dist.empty()) return;
    dist = detail::bfs_distances(t_, d);
    auto& count = count_[static_cast<size_t>(d)];
    count.assign(static_cast<size_t>(t_.node_count()), 0.0);
    std::vector<NodeId> order;
    order.reserve(static_cast<size_t>(t_.node_count()));
    for (int i = 0; i < t_.node_count(); ++i)
      if (dist[static_cast<size_t>(i)] >= 0) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      return dist[static_cast<size_t>(a)] < dist[static_cast<size_t>(b)];
    });
    count[static_cast<size_t>(d)] = 1.0;
    for (NodeId u : order) {
      if (u == d) continue;
      double c = 0.0;
      for (const auto& [v, e] : t_.neighbors(u)) {
        (void)e;
        if (dist[static_cast<size_t>(v)] == dist[static_cast<size_t>(u)] - 1)
          c += count[static_cast<size_t>(v)];
      }
      count[static_cast<size_t>(u)] = c;
    }
  }

  const Topology& t_;
  std::vector<std::vector<int>> dist_;
  std::vector<std::vector<double>> count_;
};

/// One-shot uniform draw among all minimum-hop paths from s to d.
inline Route sample_shortest_path(const Topology& t, NodeId s, NodeId d, std::mt19937_64& rng) {
  ShortestPathSampler sampler(t);
  return sampler.sample(s, d, rng);
}

// --- JSON round-trip: {nodes, edges:[[u,v,capacity]], kind} ---

inline nlohmann::json to_json(const Topology& t) {
  nlohmann::json j;
  j["nodes"] = t.node_count();
  auto& je = j["edges"] = nlohmann::json::array();
  for (size_t i = 0; i < t.edges().size(); ++i)
    je.push_back({t.edges()[i].u, t.edges()[i].v, t.capacity(static_cast<int>(i))});
  switch (t.kind()) {
    case TopologyKind::lattice:
      j["kind"] = {{"type", "lattice"}, {"rows", t.lattice_rows}, {"cols", t.lattice_cols}};
      break;
    case TopologyKind::power_law:
      j["kind"] = {{"type", "power_law"}, {"n", t.pl_n}, {"m", t.pl_m}, {"seed", t.pl_seed}};
      break;
    case TopologyKind::custom:
      j["kind"] = {{"type", "custom"}};
      break;
  }
  return j;
}

inline Topology topology_from_json(const nlohmann::json& j) {
  const int n = j.at("nodes").get<int>();
  std::vector<Edge> edges;
  std::vector<double> capacity;
  for (const auto& e : j.at("edges")) {
    edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    capacity.push_back(e.at(2).get<double>());
  }
  TopologyKind kind = TopologyKind::custom;
  std::string type = j.contains("kind") ? j["kind"].value("type", "custom") : "custom";
  if (type == "lattice") kind = TopologyKind::lattice;
  else if (type == "power_law") kind = TopologyKind::power_law;
  Topology t(n, std::move(edges), std::move(capacity), kind);
  if (kind == TopologyKind::lattice) {
    t.lattice_rows = j["kind"].value("rows", 0);
    t.lattice_cols = j["kind"].value("cols", 0);
  } else if (kind == TopologyKind::power_law) {
    t.pl_n = j["kind"].value("n", 0);
    t.pl_m = j["kind"].value("m", 0);
    t.pl_seed = j["kind"].value("seed", std::uint64_t{0});
  }
  return t;
}

}  // namespace preempt
