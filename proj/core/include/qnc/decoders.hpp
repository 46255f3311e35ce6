#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "qnc/grid.hpp"
#include "qnc/message_model.hpp"
#include "qnc/whitening.hpp"

namespace qnc {

// Common decoder output.  s_hat estimates the sparse coefficients of the
// whitened system; x_hat = phi * s_hat is the message-domain estimate.
struct DecodeResult {
  Eigen::VectorXd x_hat;
  Eigen::VectorXd s_hat;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // ||x^tau - x^{tau-1}|| per iteration
};

// 10 log10(||x||^2 / ||x - x_hat||^2), capped at 200 dB (the sentinel for
// perfect recovery).  Throws on an all-zero reference signal.
double snr(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat);

namespace detail {
// x_hat = phi * s_hat; an empty ws.phi (hand-built systems) means identity.
Eigen::VectorXd to_message_domain(const WhitenedSystem& ws,
                                  const Eigen::VectorXd& s_hat);
}  // namespace detail

// ---------------------------------------------------------------------------
// Grid-based sum-product decoder.

// Factor-graph messages captured after the final iteration (diagnostics and
// property tests; production decodes leave it unset).  Edges exist exactly
// where |theta(i,v)| > 1e-12.  Every stored message is a nonnegative bin-mass
// vector over the s-grid summing to 1.
struct BeliefState {
  int tau = 0;
  std::vector<std::vector<int>> constraint_neighbors;  // per constraint i: v's
  std::vector<std::vector<int>> variable_neighbors;    // per variable v: i's
  // forward[v][j]: message v -> variable_neighbors[v][j]
  std::vector<std::vector<Eigen::VectorXd>> forward;
  // backward[i][j]: message i -> constraint_neighbors[i][j]
  std::vector<std::vector<Eigen::VectorXd>> backward;
};

// Sum-product MMSE decoding with discretized PDF messages on `grid`.
// Forward messages start at the prior; constraint updates convolve the
// coefficient-scaled neighbor PDFs with the unit-variance Gaussian noise PDF
// (fast zero-padded convolution, out-of-grid mass folded into boundary bins);
// variable updates multiply backward messages into the prior and renormalize.
// Backward messages are damped (new = damping*new + (1-damping)*old) and
// renormalized.  Stops when ||x^tau - x^{tau-1}|| <= eps_rec or at max_iter
// (converged=false).  eps_rec < 0 selects the default
// 1e-3 * sqrt(n * (k/n) * sigma2_s).  Throws on non-finite inputs or
// messages (overflow/underflow diagnostics).
DecodeResult bp_decode(const WhitenedSystem& ws, const MessagePrior& prior,
                       const Grid& grid, double eps_rec = -1.0,
                       int max_iter = 50, double damping = 0.5,
                       BeliefState* final_state = nullptr);

// ---------------------------------------------------------------------------
// l1-minimization decoder.

struct L1Options {
  int max_stages = 80;     // lambda continuation + bisection stages
  int max_inner = 5000;    // proximal-gradient iterations per stage
  double inner_tol = 1e-10;  // relative iterate-change stop
  // Test hook: observes (stage, objective) per accepted inner iterate of the
  // regularized problem; objectives are non-increasing within a stage.
  std::function<void(int, double)> on_objective;
};

// 99th-percentile radius of a chi_m-distributed whitened noise norm:
// sqrt(m) + 2 * (2m)^(1/4).
double default_l1_epsilon(int m);

// min ||s||_1  s.t.  ||theta s - z|| <= eps_noise, solved by a monotone
// accelerated proximal-gradient method on the regularized problem
// 0.5||theta s - z||^2 + lambda ||s||_1 with lambda chosen by continuation +
// bisection until the constraint is active within 1% (residual inside
// [0.99, 1.01] * eps_noise), warm-starting each stage.  ||z|| <= eps_noise
// short-circuits to s = 0.  converged=false when the residual band is
// unreachable within the stage/iteration caps (e.g. infeasible eps_noise).
DecodeResult l1_decode(const WhitenedSystem& ws, double eps_noise,
                       const L1Options& opts = {});

// ---------------------------------------------------------------------------
// Exact MMSE oracle.

// Posterior mean under the exact (unsmoothed) spike-and-slab prior by
// enumerating all 2^n supports; weights computed in the log domain with
// max-subtraction.  Rejects n > 14.
DecodeResult exact_mmse_oracle(const WhitenedSystem& ws,
                               const MessagePrior& prior);

}  // namespace qnc
