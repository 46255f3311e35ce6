#include "qnc/forwarding.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "doctest.h"
#include "qnc/qnc_encoder.hpp"
#include "qnc/rng.hpp"

using namespace qnc;

namespace {

MessagePrior make_prior(int n, int k, double sigma2_s = 5.0) {
  MessagePrior p;
  p.n = n;
  p.k = k;
  p.sigma2_s = sigma2_s;
  return p;
}

NetworkGraph graph_from_edges(int n, NodeId gateway,
                              std::vector<Edge> edges) {
  NetworkGraph g;
  g.n = n;
  g.gateway = gateway;
  g.edges = std::move(edges);
  g.rebuild_adjacency();
  g.validate();
  return g;
}

Eigen::VectorXd ramp(int n) {
  Eigen::VectorXd x(n);
  for (int v = 0; v < n; ++v) x(v) = 0.1 * (v + 1) - 0.3;
  return x;
}

// First seed >= seed0 whose random graph reaches the gateway from everywhere.
std::pair<NetworkGraph, RoutingTree> reachable_network(int n, int m_edges,
                                                       std::uint64_t seed0) {
  for (std::uint64_t seed = seed0; seed < seed0 + 64; ++seed) {
    auto g = generate_random_network(n, m_edges, seed);
    auto rt = shortest_paths(g);
    if (rt.all_reachable()) return {std::move(g), std::move(rt)};
  }
  throw std::runtime_error("no reachable graph near seed");
}

}  // namespace

TEST_SUITE("forwarding") {

TEST_CASE("star: each leaf has its own gateway edge, one slot suffices") {
  const int n = 6;
  std::vector<Edge> edges;
  for (NodeId v = 1; v <= 5; ++v) edges.push_back({v, 6, 1.0});
  auto g = graph_from_edges(n, 6, edges);
  auto rt = shortest_paths(g);
  auto r = simulate_forwarding(g, rt, ramp(n), 8, make_prior(n, 1));
  CHECK(r.delay_slots == 1);
  CHECK(r.delay_channel_uses(8) == 8);
}

TEST_CASE("chain 1->2->3->gateway serializes three packets: delay 3") {
  auto g = graph_from_edges(4, 4, {{1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}});
  auto rt = shortest_paths(g);
  auto r = simulate_forwarding(g, rt, ramp(4), 4, make_prior(4, 1));
  // Hand schedule: slot 1 delivers node 3's packet; node 2's reaches node 3
  // at slot 1 and is delivered at slot 2; node 1's arrives at node 2 (slot
  // 1), node 3 (slot 2), gateway (slot 3).
  CHECK(r.delay_slots == 3);
  CHECK(r.delay_channel_uses(4) == 12);
}

TEST_CASE("two leaves sharing a relay: smaller origin forwarded first") {
  // 1 -> 3, 2 -> 3, 3 -> 4(gateway): both leaf packets reach node 3 in slot
  // 1; node 3 sends its own in slot 1, then origins 1 and 2 in that order.
  auto g = graph_from_edges(4, 4, {{1, 3, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}});
  auto rt = shortest_paths(g);
  auto r = simulate_forwarding(g, rt, ramp(4), 4, make_prior(4, 1));
  CHECK(r.delay_slots == 3);

  // Same topology listed in a different edge order gives the same schedule.
  auto g2 = graph_from_edges(4, 4, {{3, 4, 1.0}, {2, 3, 1.0}, {1, 3, 1.0}});
  auto rt2 = shortest_paths(g2);
  auto r2 = simulate_forwarding(g2, rt2, ramp(4), 4, make_prior(4, 1));
  CHECK(r2.delay_slots == 3);
}

TEST_CASE("delay depends on topology, not message values") {
  auto [g, rt] = reachable_network(30, 80, 2024);
  const auto prior = make_prior(30, 3);
  auto a = simulate_forwarding(g, rt, ramp(30), 6, prior);
  auto b = simulate_forwarding(g, rt, 3.0 * ramp(30), 6, prior);
  CHECK(a.delay_slots == b.delay_slots);
  CHECK(a.delay_slots >= rt.max_hop());
}

TEST_CASE("reconstruction equals the per-source quantization of x") {
  const int n = 12;
  auto [g, rt] = reachable_network(n, 40, 7);
  const auto prior = make_prior(n, 2, 5.0);
  const int L = 6;

  RandomSource rng(8);
  Eigen::VectorXd x(n);
  for (int v = 0; v < n; ++v)
    x(v) = std::sqrt(prior.sparsity_factor() * prior.sigma2_s) * rng.normal();

  auto r = simulate_forwarding(g, rt, x, L, prior);
  const double range =
      4.0 * std::sqrt(prior.sparsity_factor() * prior.sigma2_s);
  const double step = 2.0 * range / std::exp2(L);
  for (int v = 0; v < n; ++v) {
    if (std::abs(x(v)) <= range) {
      CHECK(std::abs(r.x_hat(v) - x(v)) <= 0.5 * step + 1e-12);
    }
    // Each reproduction sits exactly on a midrise level: (idx + 0.5) * step
    // away from -range.
    const double pos = (r.x_hat(v) + range) / step - 0.5;
    CHECK(std::abs(pos - std::round(pos)) < 1e-9);
  }
}

TEST_CASE("larger L trades delay for fidelity") {
  const int n = 15;
  auto [g, rt] = reachable_network(n, 60, 99);
  const auto prior = make_prior(n, 2);
  RandomSource rng(100);
  Eigen::VectorXd x(n);
  for (int v = 0; v < n; ++v) x(v) = rng.normal();

  auto lo = simulate_forwarding(g, rt, x, 4, prior);
  auto hi = simulate_forwarding(g, rt, x, 12, prior);
  CHECK(lo.delay_slots == hi.delay_slots);  // slots depend on topology only
  CHECK(hi.delay_channel_uses(12) == 3 * lo.delay_channel_uses(4));
  CHECK((x - hi.x_hat).norm() < (x - lo.x_hat).norm());
}

TEST_CASE("unreachable nodes are rejected") {
  // Node 1 has no outgoing edge, so it cannot reach the gateway.
  NetworkGraph g;
  g.n = 3;
  g.gateway = 3;
  g.edges = {{2, 3, 1.0}};
  g.rebuild_adjacency();
  auto rt = shortest_paths(g);
  CHECK_FALSE(rt.all_reachable());
  CHECK_THROWS_AS(
      simulate_forwarding(g, rt, Eigen::VectorXd::Ones(3), 4, make_prior(3, 1)),
      std::invalid_argument);
}

TEST_CASE("conservation: n - 1 transmitted packets all arrive, none twice") {
  // In a line of relays every packet is distinguishable via its quantized
  // value; a permutation or loss would break the x_hat equality checked here.
  const int n = 9;
  std::vector<Edge> edges;
  for (NodeId v = 1; v < n; ++v)
    edges.push_back({v, static_cast<NodeId>(v + 1), 1.0});
  auto g = graph_from_edges(n, n, edges);
  auto rt = shortest_paths(g);
  const auto prior = make_prior(n, 2);
  const Eigen::VectorXd x = ramp(n);
  auto r = simulate_forwarding(g, rt, x, 10, prior);
  // Worst case for a chain: the last packet needs n-1 slots.
  CHECK(r.delay_slots == n - 1);
  for (int v = 0; v < n; ++v)
    CHECK(std::abs(r.x_hat(v) - x(v)) < 1e-2);
}

}  // TEST_SUITE
