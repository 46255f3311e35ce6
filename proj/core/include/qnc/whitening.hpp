#pragma once

#include <Eigen/Dense>

#include "qnc/measurement.hpp"
#include "qnc/message_model.hpp"

namespace qnc {

// Measurement system transformed so the model noise has identity covariance:
// z' = Lambda^{-1/2} U^T z_tot and theta = Lambda^{-1/2} U^T Psi_tot phi
// (the sensing matrix is already composed with the sparsifying transform, so
// decoders estimate s directly).
struct WhitenedSystem {
  Eigen::VectorXd z;            // z'
  Eigen::MatrixXd theta;        // m x n
  int floor_count = 0;          // eigenvalues clamped to the floor
  Eigen::MatrixXd basis;        // U_N (columns = eigenvectors)
  Eigen::VectorXd eigenvalues;  // clamped Lambda_N diagonal, ascending
  Eigen::MatrixXd phi;          // sparsifying transform, kept so decoders can
                                // report x_hat = phi * s_hat

  // Applies the whitening map to a raw measurement-space vector.
  Eigen::VectorXd whiten_vector(const Eigen::VectorXd& raw) const {
    return eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() *
           (basis.transpose() * raw);
  }
  // Inverse map (exact on unclamped directions).
  Eigen::VectorXd unwhiten_vector(const Eigen::VectorXd& w) const {
    return basis * (eigenvalues.cwiseSqrt().asDiagonal() * w);
  }
};

WhitenedSystem whiten(const MeasurementSystem& ms,
                      const Eigen::VectorXd& z_tot,
                      const SparsifyingTransform& phi);

}  // namespace qnc
