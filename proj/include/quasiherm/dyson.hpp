#pragma once

#include <cmath>

#include "quasiherm/matkernel.hpp"
#include "quasiherm/metric.hpp"
#include "quasiherm/types.hpp"

namespace quasiherm {

/// Invertible map Omega with Omega^dagger Omega = Theta. We pick the
/// principal Hermitian root among the unitary family of admissible maps:
/// it is canonical, reproducible, and makes the hermitized Hamiltonian
/// unique.
struct DysonMap {
  ComplexMatrix omega;
  ComplexMatrix omega_inverse;
  double factorization_residual = 0.0;  // ||Omega^dagger Omega - Theta||
  double condition = 1.0;               // cond_2(Omega)

  Eigen::Index dim() const { return omega.rows(); }
};

inline DysonMap dyson_from_metric(const MetricOperator& m) {
  auto eigs = detail::hermitian_eigs(m.theta, "dyson", "dyson_from_metric");
  const double min_eig = eigs.values.minCoeff();
  if (min_eig <= tol::positivity_scale * std::max(m.theta.norm(), 1e-300))
    throw NotPositiveDefinite("dyson", "dyson_from_metric: metric min eigenvalue " +
                                           std::to_string(min_eig));
  const RealVector roots = eigs.values.cwiseSqrt();
  DysonMap d;
  d.omega = eigs.vectors * roots.asDiagonal() * eigs.vectors.adjoint();
  d.omega = ((d.omega + d.omega.adjoint()) * 0.5).eval();
  d.omega_inverse = eigs.vectors * roots.cwiseInverse().asDiagonal() * eigs.vectors.adjoint();
  d.omega_inverse = ((d.omega_inverse + d.omega_inverse.adjoint()) * 0.5).eval();
  d.factorization_residual = (d.omega.adjoint() * d.omega - m.theta).norm();
  d.condition = std::sqrt(eigs.values.maxCoeff() / min_eig);
  return d;
}

/// Hermitian partner h = Omega H Omega^{-1}. Isospectral with H; Hermitian
/// exactly to the extent the quasi-Hermiticity certificate of Theta =
/// Omega^dagger Omega holds, which is what the derived tolerance encodes.
inline ComplexMatrix hermitize(const ComplexMatrix& H, const DysonMap& d) {
  require_square_finite(H, "dyson", "hermitize");
  require_same_dim(H.rows(), d.dim(), "dyson", "hermitize");
  const ComplexMatrix h = d.omega * H * d.omega_inverse;
  const double herm_residual = (h - h.adjoint()).norm();
  // h - h^dagger = Omega^{-1} (Theta H - H^dagger Theta) Omega^{-1}
  const ComplexMatrix theta = d.omega.adjoint() * d.omega;
  const double intertwine = (theta * H - H.adjoint() * theta).norm();
  const double inv_norm2 = d.omega_inverse.squaredNorm();  // >= ||.||_2^2
  const double derived_tol = 10.0 * inv_norm2 * intertwine + 1e-12 * (1.0 + h.norm());
  if (herm_residual > derived_tol)
    throw HermitizationFailed("dyson", "hermitize: ||h - h^dagger|| = " +
                                           std::to_string(herm_residual) +
                                           " exceeds the derived tolerance " +
                                           std::to_string(derived_tol));
  return h;
}

/// psi -> Omega psi (the transition into the physical image space).
inline ComplexVector map_state(const ComplexVector& psi, const DysonMap& d) {
  require_same_dim(psi.size(), d.dim(), "dyson", "map_state");
  return d.omega * psi;
}

}  // namespace quasiherm
