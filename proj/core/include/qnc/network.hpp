#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qnc {

using NodeId = int;  // 1-based
using EdgeId = int;  // 0-based index into NetworkGraph::edges

struct Edge {
  NodeId tail = 0;
  NodeId head = 0;
  double capacity = 1.0;  // bits per channel use
};

// Directed simple multigraph-free graph with a designated gateway (sink).
struct NetworkGraph {
  int n = 0;
  std::vector<Edge> edges;
  NodeId gateway = 0;

  // Adjacency, indexed by node-1; edge ids appear in increasing order.
  std::vector<std::vector<EdgeId>> in_edges;
  std::vector<std::vector<EdgeId>> out_edges;

  int edge_count() const { return static_cast<int>(edges.size()); }
  const std::vector<EdgeId>& in_of(NodeId v) const { return in_edges[v - 1]; }
  const std::vector<EdgeId>& out_of(NodeId v) const {
    return out_edges[v - 1];
  }

  // Recomputes in_edges/out_edges from `edges`; call after editing them.
  void rebuild_adjacency();
  // Throws std::invalid_argument on any structural invariant violation
  // (bad node ids, self-loops, duplicate (tail,head) pairs, bad gateway).
  void validate() const;
};

// In-tree toward the gateway with hop-minimal routes.  Vectors are indexed by
// node-1; kUnreachable marks nodes with no directed path to the gateway (the
// gateway itself has hop 0 and no next hop).
struct RoutingTree {
  static constexpr int kUnreachable = -1;
  static constexpr EdgeId kNoEdge = -1;

  std::vector<EdgeId> next_hop;
  std::vector<int> hop_distance;

  bool all_reachable() const;
  int max_hop() const;  // over reachable nodes
};

// Exactly m_edges directed edges drawn uniformly over ordered pairs (u,v),
// u != v, without duplicates; gateway uniform over nodes; common capacity.
NetworkGraph generate_random_network(int n, int m_edges, std::uint64_t seed,
                                     double capacity = 1.0);

// Hop-minimal routing toward g.gateway; ties broken by smallest edge id.
RoutingTree shortest_paths(const NetworkGraph& g);

// Plain-text edge list: header "n gateway", then "tail head capacity" lines.
void save_network(const NetworkGraph& g, const std::string& path);
NetworkGraph load_network(const std::string& path);

}  // namespace qnc
