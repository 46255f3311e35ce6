#include "qnc/measurement.hpp"

#include <stdexcept>

namespace qnc {

MeasurementSystem build_measurement_system(const CoefficientSchedule& sched,
                                           const NetworkGraph& g,
                                           const QuantizerSet* quantizers,
                                           const MessagePrior& prior, int T) {
  if (T < 2 || T > sched.T)
    throw std::invalid_argument("build_measurement_system: T out of range");
  if (prior.n != sched.n || g.n != sched.n ||
      g.edge_count() != sched.edge_count)
    throw std::invalid_argument("build_measurement_system: dim mismatch");
  if (quantizers && quantizers->T < T)
    throw std::invalid_argument("build_measurement_system: quantizer T");

  const int ec = sched.edge_count;
  const int d = sched.in_degree();
  MeasurementSystem ms;
  ms.T = T;
  ms.in_degree = d;
  ms.psi_tot.resize((T - 1) * d, sched.n);
  ms.psi_n_tot = Eigen::MatrixXd::Zero((T - 1) * d, (T - 1) * ec);
  ms.lambda_q.resize((T - 1) * ec);

  // Message part: row block for slot t is B * Omega(t).
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(ec, sched.n);
  for (int e = 0; e < ec; ++e)
    omega(e, sched.edge_tail[e] - 1) = sched.alpha2(e);
  for (int t = 2; t <= T; ++t) {
    if (t > 2) {
      Eigen::MatrixXd next = Eigen::MatrixXd::Zero(ec, sched.n);
      const SparseRows& f = sched.F(t);
      for (int r = 0; r < ec; ++r)
        for (const auto& [c, val] : f.entries[r])
          next.row(r) += val * omega.row(c);
      omega.swap(next);
    }
    for (int i = 0; i < d; ++i)
      ms.psi_tot.row((t - 2) * d + i) = omega.row(sched.gateway_in[i]);
  }

  // Noise propagation: block (t, t') = B F(t) ... F(t'+1), B on the diagonal.
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, ec);
  for (int i = 0; i < d; ++i) b(i, sched.gateway_in[i]) = 1.0;
  for (int t = 2; t <= T; ++t) {
    Eigen::MatrixXd w = b;
    ms.psi_n_tot.block((t - 2) * d, (t - 2) * ec, d, ec) = w;
    for (int tp = t - 1; tp >= 2; --tp) {
      w = sched.F(tp + 1).left_apply(w);
      ms.psi_n_tot.block((t - 2) * d, (tp - 2) * ec, d, ec) = w;
    }
  }

  // Uniform-noise model for the quantizers: sigma^2_e(t) = step^2 / 12.
  for (int t = 2; t <= T; ++t)
    for (int e = 0; e < ec; ++e) {
      const double step = quantizers ? quantizers->at(t, e).step : 0.0;
      ms.lambda_q((t - 2) * ec + e) = step * step / 12.0;
    }
  return ms;
}

Eigen::MatrixXd effective_noise_covariance(const MeasurementSystem& ms) {
  const Eigen::MatrixXd half =
      ms.psi_n_tot * ms.lambda_q.cwiseSqrt().asDiagonal();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(ms.m(), ms.m());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(half);
  cov.triangularView<Eigen::StrictlyUpper>() =
      cov.transpose().triangularView<Eigen::StrictlyUpper>();
  return cov;
}

Eigen::VectorXd stack_noises(const SimulationTrace& trace, int T) {
  const int ec = static_cast<int>(trace.n.rows());
  if (T - 1 > trace.n.cols())
    throw std::invalid_argument("stack_noises: T beyond trace");
  Eigen::VectorXd out((T - 1) * ec);
  for (int t = 2; t <= T; ++t)
    out.segment((t - 2) * ec, ec) = trace.n.col(t - 2);
  return out;
}

}  // namespace qnc
