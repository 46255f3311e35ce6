#pragma once

#include <Eigen/Dense>

namespace qnc {

// Orthonormalizes the columns of m (rows >= cols) via Householder QR, with
// the R-diagonal sign fix so a Gaussian input yields a Haar-distributed frame.
inline Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
  Eigen::MatrixXd r = qr.matrixQR().topRows(m.cols());
  for (int j = 0; j < q.cols(); ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace qnc
