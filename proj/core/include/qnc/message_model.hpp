#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "qnc/grid.hpp"

namespace qnc {

// Spike-and-slab prior over sparse coefficients.  sigma2_0 is the decoder-side
// smoothing variance standing in for the Dirac spike; sampling uses exact
// zeros.
struct MessagePrior {
  int n = 0;
  double k = 0.0;        // expected sparsity, 0 <= k <= n
  double sigma2_s = 1.0;  // slab variance
  double sigma2_0 = 0.0;  // spike smoothing variance; 0 -> default 1e-4*slab

  double sparsity_factor() const { return k / n; }
  double spike_variance() const {
    return sigma2_0 > 0 ? sigma2_0 : 1e-4 * sigma2_s;
  }
  // Implied per-message power E[X^2].
  double message_power() const { return sparsity_factor() * sigma2_s; }

  void validate() const;
};

struct SparsifyingTransform {
  Eigen::MatrixXd phi;  // n x n, orthonormal
};

struct MessageEnsemble {
  Eigen::VectorXi q;  // binary states
  Eigen::VectorXd s;  // sparse coefficients, s_v = 0 exactly where q_v = 0
  Eigen::VectorXd x;  // messages, x = phi * s
};

// Orthonormalizes a square iid standard-normal matrix (Householder QR with
// sign correction, so the result is Haar-distributed).
SparsifyingTransform random_orthonormal(int n, std::uint64_t seed);

// q_v iid Bernoulli(k/n); s_v ~ N(0, sigma2_s) on the support; x = phi*s.
// One uniform and one normal are consumed per coefficient regardless of q_v,
// so supports are nested across sparsity factors at a fixed seed.
MessageEnsemble sample_messages(const MessagePrior& prior,
                                const SparsifyingTransform& phi,
                                std::uint64_t seed);

// Discretized spike-and-slab density on the grid: Gaussian(0, sigma2_s)
// weighted k/n plus Gaussian(0, sigma2_0) weighted 1-k/n, tail mass folded
// into the boundary bins, renormalized to unit mass.
// Rejects grids too narrow (< 6 slab sigmas) or too coarse (> spike sigma).
std::vector<double> prior_pdf(const MessagePrior& prior, const Grid& grid);

// Grid the decoders use unless configured otherwise: half_width 8*sigma_s,
// 2048 points (the smallest power of two whose spacing resolves the default
// smoothed spike).
Grid default_grid(const MessagePrior& prior);

// Columnar text serialization: header "n", then "v q_v s_v x_v" rows.
void save_ensemble(const MessageEnsemble& ens, const std::string& path);
MessageEnsemble load_ensemble(const std::string& path);

}  // namespace qnc
