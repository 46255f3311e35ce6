#include <cmath>
#include <stdexcept>
#include <vector>

#include "qnc/decoders.hpp"

namespace qnc {

DecodeResult exact_mmse_oracle(const WhitenedSystem& ws,
                               const MessagePrior& prior) {
  const int m = static_cast<int>(ws.theta.rows());
  const int n = static_cast<int>(ws.theta.cols());
  if (n > 14)
    throw std::invalid_argument("exact_mmse_oracle: n > 14 (2^n enumeration)");
  if (ws.z.size() != m)
    throw std::invalid_argument("exact_mmse_oracle: z/theta size mismatch");
  const double p = prior.sparsity_factor();
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("exact_mmse_oracle: k/n outside [0, 1]");

  DecodeResult out;
  out.iterations = 1;
  out.converged = true;
  out.s_hat = Eigen::VectorXd::Zero(n);

  const std::uint32_t count = 1u << n;
  const double log_p = p > 0.0 ? std::log(p) : 0.0;
  const double log_1p = p < 1.0 ? std::log1p(-p) : 0.0;
  const double log_2pi = std::log(2.0 * M_PI);

  std::vector<double> log_w(count, -std::numeric_limits<double>::infinity());
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(n, count);
  double max_log_w = -std::numeric_limits<double>::infinity();

  std::vector<int> support;
  support.reserve(n);
  for (std::uint32_t q = 0; q < count; ++q) {
    const int kq = __builtin_popcount(q);
    // Supports with zero prior probability are skipped outright so the log
    // weights stay finite.
    if ((p == 0.0 && kq > 0) || (p == 1.0 && kq < n)) continue;

    double lw = kq * log_p + (n - kq) * log_1p;
    if (kq == 0) {
      // C_q = I: the Gaussian evidence of z under pure noise.
      lw += -0.5 * (m * log_2pi + ws.z.squaredNorm());
    } else {
      support.clear();
      for (int v = 0; v < n; ++v)
        if (q & (1u << v)) support.push_back(v);
      Eigen::MatrixXd theta_q(m, kq);
      for (int j = 0; j < kq; ++j) theta_q.col(j) = ws.theta.col(support[j]);

      Eigen::MatrixXd cov = prior.sigma2_s * (theta_q * theta_q.transpose());
      cov.diagonal().array() += 1.0;
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("exact_mmse_oracle: Cholesky failed");
      const Eigen::VectorXd ciz = llt.solve(ws.z);
      double log_det = 0.0;
      for (int i = 0; i < m; ++i)
        log_det += 2.0 * std::log(llt.matrixL()(i, i));
      lw += -0.5 * (m * log_2pi + log_det + ws.z.dot(ciz));

      const Eigen::VectorXd mu_q =
          prior.sigma2_s * (theta_q.transpose() * ciz);
      for (int j = 0; j < kq; ++j) means(support[j], q) = mu_q(j);
    }
    log_w[q] = lw;
    max_log_w = std::max(max_log_w, lw);
  }

  double total = 0.0;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  for (std::uint32_t q = 0; q < count; ++q) {
    if (!std::isfinite(log_w[q])) continue;
    const double w = std::exp(log_w[q] - max_log_w);
    total += w;
    acc += w * means.col(q);
  }
  out.s_hat = acc / total;
  out.x_hat = detail::to_message_domain(ws, out.s_hat);
  return out;
}

}  // namespace qnc
