#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "quasiherm/matkernel.hpp"
#include "quasiherm/types.hpp"

namespace quasiherm {

/// Paired right/left eigensystem of a diagonalizable H. Column n of
/// `right` solves H psi_n = E_n psi_n; column n of `left` solves
/// H^dagger psi^n = conj(E_n) psi^n and is rescaled so that
/// <psi^n, psi_m> = delta_nm. Right vectors keep unit F-norm; only the
/// left scales are adjusted.
struct BiorthogonalSystem {
  Eigen::VectorXcd eigenvalues;
  ComplexMatrix right;
  ComplexMatrix left;
  RealVector pairing_residuals;  // per-mode eigen/match certificate
  double gram_residual = 0.0;    // ||left^dagger * right - I||_F

  Eigen::Index dim() const { return eigenvalues.size(); }
};

namespace detail {

// Greedy nearest-conjugate assignment: for each right eigenvalue E_n pick
// the unused left eigenvalue closest to conj(E_n). Ties within the
// ambiguity threshold are rejected; non-degenerate spectra never tie.
inline std::vector<Eigen::Index> match_conjugates(const Eigen::VectorXcd& right_values,
                                                  const Eigen::VectorXcd& left_values,
                                                  double scale) {
  const Eigen::Index n = right_values.size();
  const double ambiguity = tol::cluster_scale * scale;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::vector<Eigen::Index> match(static_cast<std::size_t>(n), -1);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex target = std::conj(right_values[k]);
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    Eigen::Index best_m = -1;
    for (Eigen::Index m = 0; m < n; ++m) {
      if (used[static_cast<std::size_t>(m)]) continue;
      const double d = std::abs(target - left_values[m]);
      if (d < best) {
        second = best;
        best = d;
        best_m = m;
      } else if (d < second) {
        second = d;
      }
    }
    if (best_m < 0 || best > ambiguity)
      throw PairingAmbiguous("biortho", "no conjugate eigenvalue within tolerance of mode " +
                                            std::to_string(k));
    if (second - best <= ambiguity && second != std::numeric_limits<double>::infinity())
      throw PairingAmbiguous("biortho", "two conjugate candidates tie for mode " +
                                            std::to_string(k));
    used[static_cast<std::size_t>(best_m)] = true;
    match[static_cast<std::size_t>(k)] = best_m;
  }
  return match;
}

}  // namespace detail

/// Solve H psi_n = E_n psi_n and H^dagger psi^n = conj(E_n) psi^n, pair the
/// two spectra by nearest conjugate, and biorthonormalize.
inline BiorthogonalSystem solve_biorthogonal(const ComplexMatrix& H, double tol_eig = 0.0) {
  require_square_finite(H, "biortho", "solve_biorthogonal");
  const Spectrum right = eig_general(H, tol_eig);
  const Spectrum left = eig_general(H.adjoint().eval(), tol_eig);
  const double hnorm = H.norm();

  const auto match = detail::match_conjugates(right.eigenvalues, left.eigenvalues, hnorm);

  BiorthogonalSystem sys;
  sys.eigenvalues = right.eigenvalues;
  sys.right = right.right_vectors;
  sys.left.resize(H.rows(), H.cols());
  sys.pairing_residuals.resize(H.rows());

  for (Eigen::Index n = 0; n < H.rows(); ++n) {
    const Eigen::Index m = match[static_cast<std::size_t>(n)];
    const ComplexVector raw = left.right_vectors.col(m);
    const Complex overlap = raw.dot(sys.right.col(n));  // <raw, psi_n>
    // Self-orthogonal pair: H is (numerically) non-diagonalizable.
    if (std::abs(overlap) < 1e-8)
      throw DegenerateSpectrum("biortho", "left/right overlap " + std::to_string(std::abs(overlap)) +
                                              " vanishes for mode " + std::to_string(n) +
                                              " (exceptional point)");
    sys.left.col(n) = raw / std::conj(overlap);
    const double match_err = std::abs(std::conj(sys.eigenvalues[n]) - left.eigenvalues[m]);
    const double left_res =
        (H.adjoint() * sys.left.col(n) - std::conj(sys.eigenvalues[n]) * sys.left.col(n)).norm() /
        sys.left.col(n).norm();
    sys.pairing_residuals[n] = std::max({right.residuals[n], left_res, match_err});
  }

  const ComplexMatrix gram = sys.left.adjoint() * sys.right;
  sys.gram_residual = (gram - ComplexMatrix::Identity(H.rows(), H.cols())).norm();
  return sys;
}

/// Recompute the certificate of a biorthogonal system against H: the worst
/// of the per-mode eigen-residuals, the unit-norm deviation of the right
/// vectors (scaled by ||H||), and the Gram deviation.
inline double biortho_residual(const ComplexMatrix& H, const BiorthogonalSystem& sys) {
  require_square_finite(H, "biortho", "biortho_residual");
  require_same_dim(H.rows(), sys.dim(), "biortho", "biortho_residual");
  require_same_dim(sys.right.rows(), H.rows(), "biortho", "biortho_residual");
  const double hnorm = H.norm();
  double worst = 0.0;
  for (Eigen::Index n = 0; n < sys.dim(); ++n) {
    const double right_res = (H * sys.right.col(n) - sys.eigenvalues[n] * sys.right.col(n)).norm();
    const double left_norm = sys.left.col(n).norm();
    const double left_res =
        left_norm > 0.0
            ? (H.adjoint() * sys.left.col(n) - std::conj(sys.eigenvalues[n]) * sys.left.col(n))
                      .norm() /
                  left_norm
            : hnorm;
    const double unit_dev = std::abs(sys.right.col(n).norm() - 1.0) * hnorm;
    worst = std::max({worst, right_res, left_res, unit_dev});
  }
  const ComplexMatrix gram = sys.left.adjoint() * sys.right;
  const double gram_dev = (gram - ComplexMatrix::Identity(sys.dim(), sys.dim())).norm();
  return std::max(worst, gram_dev);
}

}  // namespace quasiherm
