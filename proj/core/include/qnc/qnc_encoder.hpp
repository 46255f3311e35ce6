#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "qnc/message_model.hpp"
#include "qnc/network.hpp"
#include "qnc/rng.hpp"

namespace qnc {

// Row-sparse matrix: per row, (column, value) entries in ascending column
// order.  Used for the propagation matrices F(t), whose row e has support
// In(tail(e)).
struct SparseRows {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<std::pair<int, double>>> entries;

  // this * v
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  // y * this, for dense y with cols() == rows (builds B*F(t)*...*F(t'+1)
  // chains row-block by row-block)
  Eigen::MatrixXd left_apply(const Eigen::MatrixXd& y) const;
  Eigen::MatrixXd dense() const;
};

// Time-indexed network-coding coefficients.  A(t) is nonzero only at t=2 and
// only at (e, tail(e)), so it is stored as the vector alpha2; F(t) for
// t = 2..T live in f[t-2] (F(2) multiplies the all-zero Y(1) but still takes
// part in the t=2 row normalization).  B selects In(gateway) rows in edge-id
// order.  Tail/capacity copies make the schedule self-contained downstream.
struct CoefficientSchedule {
  int T = 0;
  int n = 0;
  int edge_count = 0;
  Eigen::VectorXd alpha2;           // alpha_{e,tail(e)}(2), post-rescale
  std::vector<SparseRows> f;        // f[t-2] = F(t), t = 2..T
  std::vector<EdgeId> gateway_in;   // B row e-ids, ascending
  std::vector<NodeId> edge_tail;    // tail(e)
  std::vector<double> edge_capacity;

  const SparseRows& F(int t) const { return f.at(t - 2); }
  int in_degree() const { return static_cast<int>(gateway_in.size()); }
};

// Midrise uniform quantizer with even level count over [-range, range].
// range == 0 marks the degenerate no-information quantizer (outputs exact 0).
struct EdgeQuantizer {
  long long levels = 0;
  double range = 0.0;
  double step = 0.0;

  bool degenerate() const { return range <= 0.0; }
  double quantize(double u, bool* clipped = nullptr) const;
};

// Quantizers per slot and edge: at(t, e), t = 2..T.
struct QuantizerSet {
  int T = 0;
  std::vector<std::vector<EdgeQuantizer>> q;  // q[t-2][e]

  const EdgeQuantizer& at(int t, EdgeId e) const { return q.at(t - 2)[e]; }
};

struct SimulationTrace {
  // Column t-1 holds Y(t) / N(t) / Z(t); Y has a leading all-zero column for
  // the rest state Y(1), N and Z start at t=2.
  Eigen::MatrixXd y;  // |E| x T
  Eigen::MatrixXd n;  // |E| x (T-1)
  Eigen::MatrixXd z;  // |In(v0)| x (T-1)
  long long clip_count = 0;
  std::vector<long long> clips_per_slot;  // per t = 2..T

  Eigen::VectorXd y_at(int t) const { return y.col(t - 1); }
  Eigen::VectorXd n_at(int t) const { return n.col(t - 2); }
  Eigen::VectorXd z_at(int t) const { return z.col(t - 2); }
  // Z(2..T) stacked into one vector, slot-major (the decoder's Z_tot).
  Eigen::VectorXd z_tot(int upto_t) const;
};

// alpha_{e,v}(2) iid N(0,1) on the legal pattern; per-node beta blocks
// orthonormalized Gaussian (rows orthonormal when |Out| <= |In|, columns
// otherwise); rows of [F(t)|A(t)] rescaled to unit l2 norm.
CoefficientSchedule generate_coefficients(const NetworkGraph& g, int T,
                                          std::uint64_t seed);

// The raw local coefficient block for a node with the given out/in degrees,
// before row rescaling: orthonormalized Gaussian as described above.
Eigen::MatrixXd local_orthonormal_block(int out_degree, int in_degree,
                                        RandomSource& rng);

// Noiseless transfer Omega(t): Omega(2) = A(2); Omega(t) = F(t) Omega(t-1).
Eigen::MatrixXd transfer_coefficients(const CoefficientSchedule& sched, int t);

// Level count 2^{L C}, rounded to the nearest integer (then floored to even
// for the midrise structure); throws when fewer than 2 levels result.
long long quantizer_levels(int L, double capacity);

// R_e(t) = 4 * sqrt((k/n) sigma2_s * ||Omega_e(t)||^2), levels = 2^{L C_e}.
QuantizerSet design_quantizers(const CoefficientSchedule& sched,
                               const MessagePrior& prior, int L);

// Runs the quantized recursion for t = 2..T, recording contents, noises and
// gateway packets.  Pass quantizers = nullptr for infinite-resolution mode
// (N identically 0).
SimulationTrace simulate(const NetworkGraph& g,
                         const CoefficientSchedule& sched,
                         const QuantizerSet* quantizers,
                         const Eigen::VectorXd& x, int T);

// Debug text export: one "t e Y_e(t) N_e(t)" record per edge per slot.
void save_trace_text(const SimulationTrace& trace, const std::string& path);
// Exact binary round-trip.
void save_trace_binary(const SimulationTrace& trace, const std::string& path);
SimulationTrace load_trace_binary(const std::string& path);

}  // namespace qnc
