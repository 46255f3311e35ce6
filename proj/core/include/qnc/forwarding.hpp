#pragma once

#include <Eigen/Dense>

#include "qnc/message_model.hpp"
#include "qnc/network.hpp"

namespace qnc {

// Outcome of the store-and-forward baseline.  Routing is lossless: x_hat
// differs from x only by the source quantization.
struct ForwardingResult {
  Eigen::VectorXd x_hat;
  int delay_slots = 0;      // slot at which the last packet reaches v0
  long long clip_count = 0; // sources saturating their quantizer

  long long delay_channel_uses(int L) const {
    return static_cast<long long>(L) * delay_slots;
  }
};

// Slot-synchronous store-and-forward along the routing tree: every source
// quantizes its message with a 2^{L C} midrise quantizer over
// +-4 sqrt((k/n) sigma2_s) (C = capacity of its next-hop edge; the gateway,
// which delivers its own message at slot 0, uses C = 1), then packets move
// one hop per slot, at most one packet per edge per slot, per-node FIFO
// queues with same-slot arrivals ordered by smaller origin id.  Arrivals
// become forwardable the following slot.  Requires every node to reach the
// gateway.
ForwardingResult simulate_forwarding(const NetworkGraph& g,
                                     const RoutingTree& rt,
                                     const Eigen::VectorXd& x, int L,
                                     const MessagePrior& prior);

}  // namespace qnc
