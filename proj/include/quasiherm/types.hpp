#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

#include "quasiherm/errors.hpp"

namespace quasiherm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Default tolerances. The spectral ones scale with dimension and norm;
// the residual gates are the certification thresholds used throughout.
namespace tol {
inline constexpr double eig_scale = 1e-10;         // * dim * ||A||_F
inline constexpr double cluster_scale = 1e-8;      // * ||A||_F, degeneracy gate
inline constexpr double reality = 1e-9;            // * ||H||_F, |Im E| gate
inline constexpr double certification = 1e-9;      // normalized residual gate
inline constexpr double positivity_scale = 1e-10;  // * ||Theta||, min eigenvalue
inline constexpr double pc_involutivity = 1e-9;    // ||C^2 - I||
inline constexpr double kappa_imag = 1e-8;         // |Im kappa| / |kappa|
inline constexpr double proportionality = 1e-8;    // eigenvector collinearity

inline double evolution(double t, double h_norm) {
  return 1e-9 * (1.0 + std::abs(t) * h_norm);
}
}  // namespace tol

inline void require_square_finite(const ComplexMatrix& A, const std::string& module,
                                  const char* op) {
  if (A.rows() == 0 || A.rows() != A.cols())
    throw DimensionMismatch(module, std::string(op) + ": expected a nonempty square matrix, got " +
                                        std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
  if (!A.allFinite())
    throw DimensionMismatch(module, std::string(op) + ": matrix has non-finite entries");
}

inline void require_same_dim(Eigen::Index a, Eigen::Index b, const std::string& module,
                             const char* op) {
  if (a != b)
    throw DimensionMismatch(module, std::string(op) + ": dimensions disagree (" +
                                        std::to_string(a) + " vs " + std::to_string(b) + ")");
}

inline ComplexMatrix identity_like(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

}  // namespace quasiherm
