#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "quasiherm/biortho.hpp"
#include "quasiherm/krein.hpp"
#include "quasiherm/matkernel.hpp"
#include "quasiherm/types.hpp"

namespace quasiherm {

/// Hermitian positive-definite metric Theta assembled from left
/// eigenvectors, with its certificates. theta_inverse comes from the same
/// Hermitian eigendecomposition, so it is Hermitian by construction.
struct MetricOperator {
  ComplexMatrix theta;
  ComplexMatrix theta_inverse;
  RealVector scales;  // per-mode factors applied to the left vectors
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double hermiticity_residual = 0.0;
  // ||Theta H - H^dagger Theta|| / (||Theta|| ||H||); absent when the
  // operator was built without reference to any H.
  std::optional<double> quasi_h_residual;

  Eigen::Index dim() const { return theta.rows(); }
};

struct COperator {
  ComplexMatrix C;
  double involutivity_residual = 0.0;
};

inline double quasi_hermiticity_residual(const ComplexMatrix& theta, const ComplexMatrix& H) {
  require_square_finite(theta, "metric", "quasi_hermiticity_residual");
  require_same_dim(theta.rows(), H.rows(), "metric", "quasi_hermiticity_residual");
  const double denom = theta.norm() * H.norm();
  if (denom == 0.0) return 0.0;
  return (theta * H - H.adjoint() * theta).norm() / denom;
}

namespace detail {

struct IntertwinerAssembly {
  ComplexMatrix theta;
  RealVector eigenvalues;  // ascending
  ComplexMatrix eigenvectors;
  double hermiticity_residual = 0.0;
  bool has_conjugate_pairs = false;
};

// Intertwiner candidate from the biorthogonal system. For a real spectrum
// this is exactly sum_n scales_n^2 |psi^n><psi^n|. Complex-conjugate pairs
// contribute the cross terms scales_n scales_m |psi^n><psi^m| instead,
// which keeps Theta H = H^dagger Theta at the price of indefiniteness:
// that sign defect is precisely what the positivity certificate detects in
// the broken phase.
inline IntertwinerAssembly assemble_intertwiner(const BiorthogonalSystem& sys,
                                                const RealVector& scales, double self_pair_tol) {
  const Eigen::Index n = sys.dim();
  std::vector<Eigen::Index> partner(static_cast<std::size_t>(n), Eigen::Index{-1});
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(sys.eigenvalues[k].imag()) <= self_pair_tol) {
      partner[static_cast<std::size_t>(k)] = k;
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_m = k;
    for (Eigen::Index m = 0; m < n; ++m) {
      if (m == k) continue;
      const double d = std::abs(std::conj(sys.eigenvalues[k]) - sys.eigenvalues[m]);
      if (d < best) {
        best = d;
        best_m = m;
      }
    }
    partner[static_cast<std::size_t>(k)] = best_m;
  }
  // Unresolved pairs fall back to self-pairing; the quasi-Hermiticity
  // certificate then records the damage instead of hiding it.
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index m = partner[static_cast<std::size_t>(k)];
    if (partner[static_cast<std::size_t>(m)] != k) partner[static_cast<std::size_t>(k)] = k;
  }

  IntertwinerAssembly out;
  out.theta = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index m = partner[static_cast<std::size_t>(k)];
    if (m != k) out.has_conjugate_pairs = true;
    out.theta.noalias() += (scales[k] * scales[m]) * sys.left.col(k) * sys.left.col(m).adjoint();
  }
  out.hermiticity_residual = (out.theta - out.theta.adjoint()).norm();
  out.theta = ((out.theta + out.theta.adjoint()) * 0.5).eval();
  const auto eigs = hermitian_eigs(out.theta, "metric", "assemble_intertwiner");
  out.eigenvalues = eigs.values;
  out.eigenvectors = eigs.vectors;
  return out;
}

}  // namespace detail

/// Non-throwing summary of the intertwiner candidate: what build_metric
/// would certify, exposed so sweeps and reports can show the sign defect
/// of broken-phase candidates instead of failing.
struct IntertwinerDiagnostics {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double quasi_h_residual = 0.0;
  bool has_conjugate_pairs = false;
};

inline IntertwinerDiagnostics intertwiner_diagnostics(const ComplexMatrix& H,
                                                      const BiorthogonalSystem& sys,
                                                      const RealVector& scales,
                                                      double reality_tol = tol::reality) {
  require_square_finite(H, "metric", "intertwiner_diagnostics");
  require_same_dim(H.rows(), sys.dim(), "metric", "intertwiner_diagnostics");
  require_same_dim(scales.size(), sys.dim(), "metric", "intertwiner_diagnostics");
  const auto assembly = detail::assemble_intertwiner(sys, scales, reality_tol * H.norm());
  IntertwinerDiagnostics d;
  d.min_eigenvalue = assembly.eigenvalues.minCoeff();
  d.max_eigenvalue = assembly.eigenvalues.maxCoeff();
  d.quasi_h_residual = quasi_hermiticity_residual(assembly.theta, H);
  d.has_conjugate_pairs = assembly.has_conjugate_pairs;
  return d;
}

/// Assemble Theta = sum_n scales_n^2 |psi^n><psi^n| and certify it as a
/// metric for H: Hermitian, positive definite, invertible, and
/// intertwining. In the broken phase no positive intertwiner exists and
/// the positivity certificate fails.
inline MetricOperator build_metric(const ComplexMatrix& H, const BiorthogonalSystem& sys,
                                   const RealVector& scales, double reality_tol = tol::reality) {
  require_square_finite(H, "metric", "build_metric");
  require_same_dim(H.rows(), sys.dim(), "metric", "build_metric");
  require_same_dim(scales.size(), sys.dim(), "metric", "build_metric");
  for (Eigen::Index k = 0; k < scales.size(); ++k)
    if (!(scales[k] > 0.0) || !std::isfinite(scales[k]))
      throw NotPositiveDefinite("metric", "build_metric: scale " + std::to_string(k) +
                                              " is not strictly positive");

  const double hnorm = H.norm();
  auto assembly = detail::assemble_intertwiner(sys, scales, reality_tol * hnorm);
  const double tnorm = assembly.theta.norm();
  if (assembly.hermiticity_residual > 1e-12 * (1.0 + tnorm))
    throw NotHermitian("metric", "build_metric: assembly is not Hermitian (residual " +
                                     std::to_string(assembly.hermiticity_residual) + ")");
  const double min_eig = assembly.eigenvalues.minCoeff();
  if (min_eig <= tol::positivity_scale * std::max(tnorm, 1e-300)) {
    std::string why = assembly.has_conjugate_pairs
                          ? "spectrum has complex-conjugate pairs (broken phase); every Hermitian "
                            "intertwiner is indefinite"
                          : "assembled metric is not positive definite";
    throw NotPositiveDefinite("metric", "build_metric: min eigenvalue " + std::to_string(min_eig) +
                                            "; " + why);
  }

  MetricOperator m;
  m.theta = assembly.theta;
  m.theta_inverse = assembly.eigenvectors * assembly.eigenvalues.cwiseInverse().asDiagonal() *
                    assembly.eigenvectors.adjoint();
  m.theta_inverse = ((m.theta_inverse + m.theta_inverse.adjoint()) * 0.5).eval();
  m.scales = scales;
  m.min_eigenvalue = min_eig;
  m.max_eigenvalue = assembly.eigenvalues.maxCoeff();
  m.hermiticity_residual = assembly.hermiticity_residual;
  m.quasi_h_residual = quasi_hermiticity_residual(m.theta, H);
  return m;
}

/// Overload certifying against the Hamiltonian reconstructed from the
/// system itself (H = sum_n E_n |psi_n><psi^n|).
inline MetricOperator build_metric(const BiorthogonalSystem& sys, const RealVector& scales,
                                   double reality_tol = tol::reality) {
  const ComplexMatrix H_rec =
      sys.right * sys.eigenvalues.asDiagonal() * sys.left.adjoint();
  return build_metric(H_rec, sys, scales, reality_tol);
}

/// Metric wrapper around an explicitly given Theta (certifies Hermiticity,
/// positivity and invertibility; the quasi-Hermiticity certificate is
/// filled only when H is supplied).
inline MetricOperator metric_from_matrix(const ComplexMatrix& theta,
                                         const ComplexMatrix* H = nullptr) {
  auto eigs = detail::hermitian_eigs(theta, "metric", "metric_from_matrix");
  const double min_eig = eigs.values.minCoeff();
  if (min_eig <= tol::positivity_scale * std::max(theta.norm(), 1e-300))
    throw NotPositiveDefinite("metric", "metric_from_matrix: min eigenvalue " +
                                            std::to_string(min_eig));
  MetricOperator m;
  m.theta = ((theta + theta.adjoint()) * 0.5).eval();
  m.theta_inverse =
      eigs.vectors * eigs.values.cwiseInverse().asDiagonal() * eigs.vectors.adjoint();
  m.theta_inverse = ((m.theta_inverse + m.theta_inverse.adjoint()) * 0.5).eval();
  m.scales = RealVector::Ones(theta.rows());
  m.min_eigenvalue = min_eig;
  m.max_eigenvalue = eigs.values.maxCoeff();
  m.hermiticity_residual = (theta - theta.adjoint()).norm();
  if (H) m.quasi_h_residual = quasi_hermiticity_residual(m.theta, *H);
  return m;
}

inline MetricOperator identity_metric(Eigen::Index n) {
  MetricOperator m;
  m.theta = ComplexMatrix::Identity(n, n);
  m.theta_inverse = m.theta;
  m.scales = RealVector::Ones(n);
  m.min_eigenvalue = 1.0;
  m.max_eigenvalue = 1.0;
  return m;
}

struct PCNormalization {
  RealVector scales;       // t_n = |kappa_n|^{-1/2}
  Eigen::VectorXi signs;   // sign(kappa_n); the Krein signature of the mode
};

namespace detail {

inline ComplexMatrix spectral_metric(const BiorthogonalSystem& sys, const RealVector& t) {
  ComplexMatrix theta = ComplexMatrix::Zero(sys.dim(), sys.dim());
  for (Eigen::Index k = 0; k < sys.dim(); ++k)
    theta.noalias() += (t[k] * t[k]) * sys.left.col(k) * sys.left.col(k).adjoint();
  return ((theta + theta.adjoint()) * 0.5).eval();
}

}  // namespace detail

/// Fix the left-vector scales so that C = P Theta is an involution.
/// With psi^n = kappa_n P psi_n the constraint (t_n^2 kappa_n)^2 = 1 gives
/// the closed form t_n = |kappa_n|^{-1/2}. A residual-driven refinement
/// pass covers inputs whose kappa extraction is noisy.
inline PCNormalization fix_pc_normalization(const BiorthogonalSystem& sys,
                                            const PTClassification& cls, const Pseudometric& P) {
  require_same_dim(sys.dim(), P.dim(), "metric", "fix_pc_normalization");
  if (cls.verdict != Verdict::Unbroken)
    throw BrokenPhase("metric",
                      "fix_pc_normalization: no positive metric exists for a broken spectrum");
  const Eigen::Index n = sys.dim();
  require_same_dim(cls.proportionality_constants.size(), n, "metric", "fix_pc_normalization");

  PCNormalization out;
  out.scales.resize(n);
  out.signs.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Complex kappa = cls.proportionality_constants[k];
    if (!(std::abs(kappa) > 0.0) || !std::isfinite(std::abs(kappa)))
      throw ComplexKappa("metric", "fix_pc_normalization: kappa vanishes for mode " +
                                       std::to_string(k));
    if (std::abs(kappa.imag()) > tol::kappa_imag * std::abs(kappa)) {
      // Fallback: the quadratic form <psi^n, P psi^n> equals kappa and is
      // real by Hermiticity of P; use it when the collinearity fit drifts.
      const Complex quad = sys.left.col(k).dot(P.P * sys.left.col(k));
      if (std::abs(quad - kappa) > 1e-6 * std::max(std::abs(kappa), std::abs(quad)) ||
          std::abs(quad.imag()) > tol::kappa_imag * std::abs(quad))
        throw ComplexKappa("metric", "fix_pc_normalization: kappa for mode " + std::to_string(k) +
                                         " is not real within tolerance");
      kappa = quad;
    }
    out.scales[k] = 1.0 / std::sqrt(std::abs(kappa.real()));
    out.signs[k] = kappa.real() > 0.0 ? 1 : -1;
  }

  // Refinement: project C^2 onto each spectral component and damp the
  // scale until ||C^2 - I|| meets the gate (converges in one pass on
  // clean data because the projection equals (t_n^2 kappa_n)^2).
  const ComplexMatrix I = ComplexMatrix::Identity(n, n);
  for (int iter = 0; iter < 8; ++iter) {
    const ComplexMatrix C = P.P * detail::spectral_metric(sys, out.scales);
    const ComplexMatrix C2 = C * C;
    if ((C2 - I).norm() <= tol::pc_involutivity) break;
    for (Eigen::Index k = 0; k < n; ++k) {
      const Complex proj = sys.left.col(k).dot(C2 * sys.right.col(k));
      const double mag = std::abs(proj);
      if (mag > 0.0 && std::isfinite(mag)) out.scales[k] /= std::pow(mag, 0.25);
    }
  }
  return out;
}

/// C = P Theta (the factorization Theta = P C solved for C). With
/// enforce_tol >= 0 the involutivity certificate becomes a hard gate.
inline COperator build_c_operator(const MetricOperator& theta, const Pseudometric& P,
                                  double enforce_tol = -1.0) {
  require_same_dim(theta.dim(), P.dim(), "metric", "build_c_operator");
  COperator c;
  c.C = P.P * theta.theta;
  c.involutivity_residual =
      (c.C * c.C - ComplexMatrix::Identity(theta.dim(), theta.dim())).norm();
  if (enforce_tol >= 0.0 && c.involutivity_residual > enforce_tol)
    throw InvolutivityViolated("metric", "build_c_operator: ||C^2 - I|| = " +
                                             std::to_string(c.involutivity_residual) +
                                             " (metric scales not PC-normalized?)");
  return c;
}

/// Metric-mediated adjoint X -> Theta^{-1} X^dagger Theta.
inline ComplexMatrix s_adjoint(const ComplexMatrix& X, const MetricOperator& theta) {
  require_square_finite(X, "metric", "s_adjoint");
  require_same_dim(X.rows(), theta.dim(), "metric", "s_adjoint");
  return theta.theta_inverse * X.adjoint() * theta.theta;
}

/// Per-observable residual ||Theta L - L^dagger Theta|| / (||Theta|| ||L||).
/// Admissible observables of the Theta-metric theory must drive this to
/// zero; the caller picks the acceptance threshold.
inline std::vector<double> observable_compatibility(const std::vector<ComplexMatrix>& observables,
                                                    const MetricOperator& theta) {
  std::vector<double> out;
  out.reserve(observables.size());
  for (const auto& lambda : observables) {
    require_square_finite(lambda, "metric", "observable_compatibility");
    require_same_dim(lambda.rows(), theta.dim(), "metric", "observable_compatibility");
    const double denom = theta.theta.norm() * lambda.norm();
    out.push_back(denom == 0.0
                      ? 0.0
                      : (theta.theta * lambda - lambda.adjoint() * theta.theta).norm() / denom);
  }
  return out;
}

inline double commutator_residual(const ComplexMatrix& X, const ComplexMatrix& H) {
  require_square_finite(X, "metric", "commutator_residual");
  require_same_dim(X.rows(), H.rows(), "metric", "commutator_residual");
  const double denom = X.norm() * H.norm();
  if (denom == 0.0) return 0.0;
  return (X * H - H * X).norm() / denom;
}

}  // namespace quasiherm
