#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "quasiherm/biortho.hpp"
#include "quasiherm/matkernel.hpp"
#include "quasiherm/types.hpp"

namespace quasiherm {

/// Involutive indefinite (pseudo-)metric P with P = P^dagger and P^2 = I.
/// Validated on construction; the signature is the count of +1/-1
/// eigenvalues.
struct Pseudometric {
  ComplexMatrix P;
  double hermiticity_residual = 0.0;
  double involutivity_residual = 0.0;
  int plus_count = 0;
  int minus_count = 0;

  Eigen::Index dim() const { return P.rows(); }

  // P^2 = I certified at construction, so the inverse is P itself; an
  // explicit solve is kept as fallback for uncertified instances.
  ComplexMatrix inverse() const {
    if (involutivity_residual <= 1e-12 * (1.0 + P.squaredNorm())) return P;
    return P.partialPivLu().inverse();
  }

  static Pseudometric from_matrix(const ComplexMatrix& P_in) {
    require_square_finite(P_in, "krein", "Pseudometric::from_matrix");
    Pseudometric p;
    p.P = P_in;
    p.hermiticity_residual = (P_in - P_in.adjoint()).norm();
    if (p.hermiticity_residual > 1e-12 * (1.0 + P_in.norm()))
      throw NotHermitian("krein", "pseudometric: ||P - P^dagger|| = " +
                                      std::to_string(p.hermiticity_residual));
    p.involutivity_residual =
        (P_in * P_in - ComplexMatrix::Identity(P_in.rows(), P_in.cols())).norm();
    if (p.involutivity_residual > 1e-12 * (1.0 + P_in.squaredNorm()))
      throw InvolutivityViolated("krein", "pseudometric: ||P^2 - I|| = " +
                                              std::to_string(p.involutivity_residual));
    const auto eigs = detail::hermitian_eigs(P_in, "krein", "Pseudometric::from_matrix");
    for (Eigen::Index i = 0; i < eigs.values.size(); ++i)
      (eigs.values[i] > 0.0 ? p.plus_count : p.minus_count)++;
    return p;
  }
};

enum class Verdict { Unbroken, Broken };

inline const char* to_string(Verdict v) { return v == Verdict::Unbroken ? "Unbroken" : "Broken"; }

/// Outcome of the spectral-reality dichotomy. Every mode is either real
/// (real_flags[n], kappa[n] = proportionality constant of P^{-1} psi^n to
/// psi_n) or a member of exactly one conjugate pair (pairing[n] = partner).
struct PTClassification {
  Verdict verdict = Verdict::Unbroken;
  std::vector<bool> real_flags;
  std::vector<Eigen::Index> pairing;  // -1 for real modes
  Eigen::VectorXcd proportionality_constants;
  RealVector residuals;  // relative proportionality residual per mode
};

/// ||H^dagger P - P H||_F / (||P|| ||H||); zero means P-self-adjoint.
inline double pseudo_hermiticity_residual(const ComplexMatrix& H, const Pseudometric& P) {
  require_square_finite(H, "krein", "pseudo_hermiticity_residual");
  require_same_dim(H.rows(), P.dim(), "krein", "pseudo_hermiticity_residual");
  const double denom = P.P.norm() * H.norm();
  if (denom == 0.0) return 0.0;
  return (H.adjoint() * P.P - P.P * H).norm() / denom;
}

/// Classify the spectrum: real modes carry a proportionality constant
/// kappa_n with P^{-1} psi^n = kappa_n psi_n; complex modes are matched to
/// their conjugate partners, whose right eigenvector P^{-1} psi^n must
/// reproduce.
inline PTClassification classify_pt(const ComplexMatrix& H, const Pseudometric& P,
                                    const BiorthogonalSystem& sys, double reality_tol = tol::reality,
                                    double pseudo_h_gate = 1e-6) {
  require_square_finite(H, "krein", "classify_pt");
  require_same_dim(H.rows(), P.dim(), "krein", "classify_pt");
  require_same_dim(H.rows(), sys.dim(), "krein", "classify_pt");

  const double phr = pseudo_hermiticity_residual(H, P);
  if (phr > pseudo_h_gate)
    throw ProportionalityViolated("krein", "classify_pt: H is not P-self-adjoint (residual " +
                                               std::to_string(phr) + ")");

  const Eigen::Index n = sys.dim();
  const double hnorm = H.norm();
  const ComplexMatrix Pinv = P.inverse();

  PTClassification cls;
  cls.real_flags.assign(static_cast<std::size_t>(n), false);
  cls.pairing.assign(static_cast<std::size_t>(n), Eigen::Index{-1});
  cls.proportionality_constants = Eigen::VectorXcd::Zero(n);
  cls.residuals = RealVector::Zero(n);

  for (Eigen::Index k = 0; k < n; ++k) {
    const ComplexVector phi = Pinv * sys.left.col(k);
    const Complex e = sys.eigenvalues[k];
    if (std::abs(e.imag()) <= reality_tol * hnorm) {
      // Real mode: phi must be collinear with psi_k.
      const Complex kappa = sys.right.col(k).dot(phi) / sys.right.col(k).squaredNorm();
      const double res = (phi - kappa * sys.right.col(k)).norm() / std::max(phi.norm(), 1e-300);
      if (res > tol::proportionality)
        throw ProportionalityViolated("krein", "mode " + std::to_string(k) +
                                                   ": P^{-1} psi^n deviates from psi_n by " +
                                                   std::to_string(res));
      cls.real_flags[static_cast<std::size_t>(k)] = true;
      cls.proportionality_constants[k] = kappa;
      cls.residuals[k] = res;
    } else {
      // Complex mode: locate the conjugate partner.
      double best = std::numeric_limits<double>::infinity();
      Eigen::Index best_m = -1;
      for (Eigen::Index m = 0; m < n; ++m) {
        if (m == k) continue;
        const double d = std::abs(std::conj(e) - sys.eigenvalues[m]);
        if (d < best) {
          best = d;
          best_m = m;
        }
      }
      if (best_m < 0 || best > tol::cluster_scale * hnorm)
        throw PairingNotFound("krein", "mode " + std::to_string(k) +
                                           ": no eigenvalue matches conj(E) within tolerance");
      const Complex kappa = sys.right.col(best_m).dot(phi) / sys.right.col(best_m).squaredNorm();
      const double res =
          (phi - kappa * sys.right.col(best_m)).norm() / std::max(phi.norm(), 1e-300);
      if (res > tol::proportionality)
        throw ProportionalityViolated("krein", "broken pair " + std::to_string(k) + "->" +
                                                   std::to_string(best_m) +
                                                   ": P^{-1} psi^n deviates from psi_m by " +
                                                   std::to_string(res));
      cls.pairing[static_cast<std::size_t>(k)] = best_m;
      cls.residuals[k] = res;
    }
  }

  // Broken pairing must be an involution without fixed points.
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index m = cls.pairing[static_cast<std::size_t>(k)];
    if (m < 0) continue;
    if (m == k || cls.pairing[static_cast<std::size_t>(m)] != k)
      throw PairingNotFound("krein", "conjugate pairing is not an involution at mode " +
                                         std::to_string(k));
  }

  const bool all_real =
      std::all_of(cls.real_flags.begin(), cls.real_flags.end(), [](bool b) { return b; });
  cls.verdict = all_real ? Verdict::Unbroken : Verdict::Broken;
  return cls;
}

}  // namespace quasiherm
