#include "qnc/forwarding.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "qnc/qnc_encoder.hpp"

namespace qnc {

ForwardingResult simulate_forwarding(const NetworkGraph& g,
                                     const RoutingTree& rt,
                                     const Eigen::VectorXd& x, int L,
                                     const MessagePrior& prior) {
  g.validate();
  if (x.size() != g.n)
    throw std::invalid_argument("simulate_forwarding: x length != n");
  if (static_cast<int>(rt.next_hop.size()) != g.n)
    throw std::invalid_argument("simulate_forwarding: routing tree size");
  if (!rt.all_reachable())
    throw std::invalid_argument(
        "simulate_forwarding: some node cannot reach the gateway");
  if (L < 1) throw std::invalid_argument("simulate_forwarding: L < 1");

  const double range = 4.0 * std::sqrt(prior.sparsity_factor() * prior.sigma2_s);

  ForwardingResult out;
  out.x_hat = Eigen::VectorXd::Zero(g.n);

  // Source quantization: levels follow the capacity of the node's first hop.
  for (NodeId v = 1; v <= g.n; ++v) {
    double capacity = 1.0;
    if (v != g.gateway) capacity = g.edges[rt.next_hop[v - 1]].capacity;
    EdgeQuantizer q;
    q.levels = quantizer_levels(L, capacity);
    q.range = range;
    q.step = 2.0 * range / static_cast<double>(q.levels);
    bool clipped = false;
    out.x_hat(v - 1) = q.quantize(x(v - 1), &clipped);
    if (clipped) ++out.clip_count;
  }

  // Store-and-forward: queues hold (origin, arrival_slot); a packet may move
  // only in slots strictly after its arrival.  The gateway's own packet is
  // delivered at slot 0 without using any edge.
  struct Packet {
    NodeId origin;
    int arrival;
  };
  std::vector<std::deque<Packet>> queue(g.n);
  for (NodeId v = 1; v <= g.n; ++v)
    if (v != g.gateway) queue[v - 1].push_back({v, 0});

  int delivered = 1;  // gateway's own message
  out.delay_slots = 0;
  const int slot_cap = 2 * g.n + rt.max_hop() + 4;
  for (int slot = 1; delivered < g.n; ++slot) {
    if (slot > slot_cap)
      throw std::logic_error("simulate_forwarding: schedule overran its bound");
    // Collect this slot's arrivals first so they only move next slot.
    std::vector<std::vector<Packet>> arrivals(g.n);
    for (NodeId v = 1; v <= g.n; ++v) {
      if (v == g.gateway) continue;
      auto& q = queue[v - 1];
      if (q.empty() || q.front().arrival >= slot) continue;
      const Packet pkt = q.front();
      q.pop_front();
      const NodeId head = g.edges[rt.next_hop[v - 1]].head;
      if (head == g.gateway) {
        ++delivered;
        out.delay_slots = std::max(out.delay_slots, slot);
      } else {
        arrivals[head - 1].push_back({pkt.origin, slot});
      }
    }
    for (NodeId v = 1; v <= g.n; ++v) {
      auto& in = arrivals[v - 1];
      std::sort(in.begin(), in.end(),
                [](const Packet& a, const Packet& b) {
                  return a.origin < b.origin;
                });
      for (const Packet& pkt : in) queue[v - 1].push_back(pkt);
    }
  }
  return out;
}

}  // namespace qnc
