#include "qnc/decoders.hpp"

#include <cmath>
#include <stdexcept>

namespace qnc {

namespace detail {

Eigen::VectorXd to_message_domain(const WhitenedSystem& ws,
                                  const Eigen::VectorXd& s_hat) {
  if (ws.phi.size() == 0) return s_hat;
  if (ws.phi.cols() != s_hat.size())
    throw std::invalid_argument("decoder: phi/s_hat size mismatch");
  return ws.phi * s_hat;
}

}  // namespace detail

double snr(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
  if (x.size() != x_hat.size())
    throw std::invalid_argument("snr: length mismatch");
  const double signal = x.squaredNorm();
  if (signal == 0.0)
    throw std::invalid_argument("snr: reference signal is all zero");
  const double err = (x - x_hat).squaredNorm();
  if (err == 0.0) return 200.0;
  return std::min(200.0, 10.0 * std::log10(signal / err));
}

}  // namespace qnc
