#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "hdmds/errors.hpp"

namespace hdmds {

// Factor L of a symmetric matrix with L L^T equal to the input after clipping
// negative eigenvalues to zero. clipped_mass records the sum of the clipped
// eigenvalues (<= 0), so the reconstruction error is bounded by |clipped_mass|
// plus roundoff.
struct PsdFactor {
  Eigen::MatrixXd factor;
  double clipped_mass = 0.0;

  Eigen::Index dim() const { return factor.rows(); }
};

// Symmetric eigendecomposition with negative-eigenvalue clipping. Kernel
// weight matrices are positive semi-definite in exact arithmetic but can dip
// slightly below zero at machine precision, which breaks a plain Cholesky.
inline PsdFactor psd_factor(const Eigen::Ref<const Eigen::MatrixXd>& sym) {
  const Eigen::Index m = sym.rows();
  if (sym.cols() != m) throw numerical_error("psd_factor: input is not square");
  const double scale = sym.cwiseAbs().maxCoeff();
  if ((sym - sym.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, scale)) {
    throw numerical_error("psd_factor: input is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw numerical_error("psd_factor: eigendecomposition failed");
  }

  PsdFactor out;
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (lambda[i] < 0.0) {
      out.clipped_mass += lambda[i];
      lambda[i] = 0.0;
    }
  }
  out.factor = eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
  return out;
}

}  // namespace hdmds
