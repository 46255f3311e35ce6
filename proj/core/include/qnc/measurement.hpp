#pragma once

#include <Eigen/Dense>

#include "qnc/message_model.hpp"
#include "qnc/qnc_encoder.hpp"

namespace qnc {

// Total measurement system for decode time T: Z_tot = Psi_tot x + N_eff with
// N_eff = Psi_N,tot N_tot.  Rows are slot-major ((t-2)*|In(v0)| + i); noise
// columns are slot-major ((t'-2)*|E| + e), matching SimulationTrace stacking.
struct MeasurementSystem {
  Eigen::MatrixXd psi_tot;    // m x n
  Eigen::MatrixXd psi_n_tot;  // m x (T-1)|E|
  Eigen::VectorXd lambda_q;   // diagonal of Lambda_Q, (T-1)|E| entries
  int T = 0;
  int in_degree = 0;

  int m() const { return (T - 1) * in_degree; }
};

MeasurementSystem build_measurement_system(const CoefficientSchedule& sched,
                                           const NetworkGraph& g,
                                           const QuantizerSet* quantizers,
                                           const MessagePrior& prior, int T);

// Psi_N,tot Lambda_Q Psi_N,tot^T, symmetrized.
Eigen::MatrixXd effective_noise_covariance(const MeasurementSystem& ms);

// N(2..T) from a trace stacked slot-major into the decoder's N_tot.
Eigen::VectorXd stack_noises(const SimulationTrace& trace, int T);

}  // namespace qnc
