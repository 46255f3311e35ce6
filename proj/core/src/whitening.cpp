#include "qnc/whitening.hpp"

#include <stdexcept>

namespace qnc {

WhitenedSystem whiten(const MeasurementSystem& ms,
                      const Eigen::VectorXd& z_tot,
                      const SparsifyingTransform& phi) {
  const int m = ms.m();
  if (z_tot.size() != m)
    throw std::invalid_argument("whiten: z_tot length mismatch");
  if (phi.phi.rows() != ms.psi_tot.cols())
    throw std::invalid_argument("whiten: phi dimension mismatch");

  const Eigen::MatrixXd cov = effective_noise_covariance(ms);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("whiten: eigendecomposition failed");

  WhitenedSystem ws;
  ws.basis = es.eigenvectors();
  ws.eigenvalues = es.eigenvalues();
  const double lambda_max = ws.eigenvalues.maxCoeff();
  if (lambda_max <= 0.0) {
    // Noiseless system: degenerate to a fixed rescaling.
    ws.eigenvalues.setConstant(1e-12);
    ws.basis = Eigen::MatrixXd::Identity(m, m);
    ws.floor_count = m;
  } else {
    const double floor = 1e-8 * lambda_max;
    for (int i = 0; i < m; ++i)
      if (ws.eigenvalues(i) < floor) {
        ws.eigenvalues(i) = floor;
        ++ws.floor_count;
      }
  }
  ws.z = ws.whiten_vector(z_tot);
  ws.theta = ws.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() *
             (ws.basis.transpose() * (ms.psi_tot * phi.phi));
  ws.phi = phi.phi;
  return ws;
}

}  // namespace qnc
