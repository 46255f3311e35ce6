#include "qnc/network.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <deque>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "qnc/rng.hpp"

namespace qnc {

void NetworkGraph::rebuild_adjacency() {
  in_edges.assign(n, {});
  out_edges.assign(n, {});
  for (EdgeId e = 0; e < edge_count(); ++e) {
    const Edge& ed = edges[e];
    if (ed.tail < 1 || ed.tail > n || ed.head < 1 || ed.head > n)
      throw std::invalid_argument("network: edge endpoint out of range");
    out_edges[ed.tail - 1].push_back(e);
    in_edges[ed.head - 1].push_back(e);
  }
}

void NetworkGraph::validate() const {
  if (n < 1) throw std::invalid_argument("network: n must be >= 1");
  if (gateway < 1 || gateway > n)
    throw std::invalid_argument("network: gateway out of range");
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const Edge& e : edges) {
    if (e.tail < 1 || e.tail > n || e.head < 1 || e.head > n)
      throw std::invalid_argument("network: edge endpoint out of range");
    if (e.tail == e.head)
      throw std::invalid_argument("network: self-loop not allowed");
    if (!seen.insert({e.tail, e.head}).second)
      throw std::invalid_argument("network: duplicate (tail,head) pair");
    if (e.capacity <= 0)
      throw std::invalid_argument("network: capacity must be positive");
  }
  if (static_cast<int>(in_edges.size()) != n ||
      static_cast<int>(out_edges.size()) != n)
    throw std::invalid_argument("network: adjacency not built");
}

bool RoutingTree::all_reachable() const {
  return std::none_of(hop_distance.begin(), hop_distance.end(),
                      [](int d) { return d == kUnreachable; });
}

int RoutingTree::max_hop() const {
  int best = 0;
  for (int d : hop_distance) best = std::max(best, d);
  return best;
}

NetworkGraph generate_random_network(int n, int m_edges, std::uint64_t seed,
                                     double capacity) {
  if (n < 2) throw std::invalid_argument("generate_random_network: n < 2");
  if (m_edges < 1)
    throw std::invalid_argument("generate_random_network: m_edges < 1");
  const std::int64_t pair_count =
      static_cast<std::int64_t>(n) * (n - 1);
  if (m_edges > pair_count)
    throw std::invalid_argument(
        "generate_random_network: m_edges exceeds n(n-1)");

  RandomSource rng(seed);
  NetworkGraph g;
  g.n = n;
  g.gateway = 1 + static_cast<NodeId>(rng.bounded(n));

  // Partial Fisher-Yates over the implicit array of ordered pairs; only
  // displaced positions are materialized.  Pair index p encodes
  // (u, v) = (p / (n-1), r < u ? r : r + 1) with r = p % (n-1), 0-based.
  std::unordered_map<std::int64_t, std::int64_t> displaced;
  displaced.reserve(static_cast<std::size_t>(m_edges) * 2);
  auto at = [&](std::int64_t i) {
    auto it = displaced.find(i);
    return it == displaced.end() ? i : it->second;
  };
  g.edges.reserve(m_edges);
  for (int i = 0; i < m_edges; ++i) {
    const std::int64_t j =
        i + static_cast<std::int64_t>(rng.bounded(pair_count - i));
    const std::int64_t p = at(j);
    displaced[j] = at(i);
    const int u = static_cast<int>(p / (n - 1));
    const int r = static_cast<int>(p % (n - 1));
    const int v = r < u ? r : r + 1;
    g.edges.push_back({u + 1, v + 1, capacity});
  }
  g.rebuild_adjacency();
  return g;
}

RoutingTree shortest_paths(const NetworkGraph& g) {
  RoutingTree rt;
  rt.next_hop.assign(g.n, RoutingTree::kNoEdge);
  rt.hop_distance.assign(g.n, RoutingTree::kUnreachable);
  rt.hop_distance[g.gateway - 1] = 0;

  // BFS from the gateway along reversed edges (unit weights, so Dijkstra
  // reduces to BFS).
  std::deque<NodeId> queue{g.gateway};
  while (!queue.empty()) {
    const NodeId w = queue.front();
    queue.pop_front();
    for (EdgeId e : g.in_of(w)) {
      const NodeId v = g.edges[e].tail;
      if (rt.hop_distance[v - 1] == RoutingTree::kUnreachable) {
        rt.hop_distance[v - 1] = rt.hop_distance[w - 1] + 1;
        queue.push_back(v);
      }
    }
  }
  // Deterministic next hop: smallest edge id among edges that descend one
  // level toward the gateway.
  for (NodeId v = 1; v <= g.n; ++v) {
    if (v == g.gateway || rt.hop_distance[v - 1] == RoutingTree::kUnreachable)
      continue;
    for (EdgeId e : g.out_of(v)) {  // out_of is sorted by edge id
      const NodeId w = g.edges[e].head;
      if (rt.hop_distance[w - 1] == rt.hop_distance[v - 1] - 1) {
        rt.next_hop[v - 1] = e;
        break;
      }
    }
  }
  return rt;
}

void save_network(const NetworkGraph& g, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("save_network: cannot open " + path);
  std::fprintf(f, "%d %d\n", g.n, g.gateway);
  for (const Edge& e : g.edges)
    std::fprintf(f, "%d %d %.17g\n", e.tail, e.head, e.capacity);
  std::fclose(f);
}

NetworkGraph load_network(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) throw std::runtime_error("load_network: cannot open " + path);
  NetworkGraph g;
  if (std::fscanf(f, "%d %d", &g.n, &g.gateway) != 2) {
    std::fclose(f);
    throw std::runtime_error("load_network: bad header in " + path);
  }
  Edge e;
  while (std::fscanf(f, "%d %d %lg", &e.tail, &e.head, &e.capacity) == 3)
    g.edges.push_back(e);
  std::fclose(f);
  g.rebuild_adjacency();
  g.validate();
  return g;
}

}  // namespace qnc
