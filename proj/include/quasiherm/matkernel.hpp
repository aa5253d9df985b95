#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "quasiherm/errors.hpp"
#include "quasiherm/types.hpp"

namespace quasiherm {

/// Full eigensystem of a dense complex matrix in canonical form:
/// eigenvalues sorted by (Re, Im) ascending, unit-norm right vectors with
/// the largest-modulus component made real positive.
struct Spectrum {
  Eigen::VectorXcd eigenvalues;
  ComplexMatrix right_vectors;  // one eigenvector per column
  RealVector residuals;         // ||A v_k - lambda_k v_k|| per pair
};

inline double default_tol_eig(const ComplexMatrix& A) {
  return tol::eig_scale * static_cast<double>(A.rows()) * std::max(A.norm(), 1e-300);
}

namespace detail {

inline bool complex_less(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

// Deterministic phase: rotate so the first largest-modulus component is
// real positive.
inline void fix_phase(Eigen::Ref<ComplexVector> v) {
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::abs(v[i]);
    if (m > best) {
      best = m;
      imax = i;
    }
  }
  if (best <= 0.0) return;
  v *= std::conj(v[imax]) / best;
}

inline void canonicalize(Eigen::VectorXcd& values, ComplexMatrix& vectors) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return complex_less(values[i], values[j]); });
  Eigen::VectorXcd sorted_values(values.size());
  ComplexMatrix sorted_vectors(vectors.rows(), vectors.cols());
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    sorted_values[k] = values[order[static_cast<std::size_t>(k)]];
    sorted_vectors.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
  }
  values.swap(sorted_values);
  vectors.swap(sorted_vectors);
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    vectors.col(k).normalize();
    fix_phase(vectors.col(k));
  }
}

inline double min_pairwise_gap(const Eigen::VectorXcd& values) {
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < values.size(); ++i)
    for (Eigen::Index j = i + 1; j < values.size(); ++j)
      gap = std::min(gap, std::abs(values[i] - values[j]));
  return gap;
}

inline RealVector eigen_residuals(const ComplexMatrix& A, const Eigen::VectorXcd& values,
                                  const ComplexMatrix& vectors) {
  RealVector r(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k)
    r[k] = (A * vectors.col(k) - values[k] * vectors.col(k)).norm();
  return r;
}

struct HermitianEigs {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // orthonormal columns
};

inline HermitianEigs hermitian_eigs(const ComplexMatrix& A, const std::string& module,
                                    const char* op) {
  require_square_finite(A, module, op);
  const double herm_residual = (A - A.adjoint()).norm();
  if (herm_residual > 1e-10 * (1.0 + A.norm()))
    throw NotHermitian(module, std::string(op) + ": ||A - A^dagger|| = " +
                                   std::to_string(herm_residual));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(((A + A.adjoint()) * 0.5).eval());
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure(module, std::string(op) + ": Hermitian eigeniteration failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace detail

/// Eigendecomposition of a general (possibly non-normal) complex matrix.
/// Rejects clustered spectra: all constructions downstream assume simple
/// eigenvalues, and a cluster signals an exceptional point.
inline Spectrum eig_general(const ComplexMatrix& A, double tol_eig = 0.0) {
  require_square_finite(A, "matkernel", "eig_general");
  if (tol_eig <= 0.0) tol_eig = default_tol_eig(A);
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(A, true);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("matkernel", "eig_general: QR iteration cap hit");
  Eigen::VectorXcd values = solver.eigenvalues();
  ComplexMatrix vectors = solver.eigenvectors();
  detail::canonicalize(values, vectors);
  if (values.size() > 1) {
    const double gap = detail::min_pairwise_gap(values);
    if (gap <= tol::cluster_scale * A.norm())
      throw DegenerateSpectrum("matkernel", "eig_general: eigenvalue gap " + std::to_string(gap) +
                                                " below cluster threshold");
  }
  RealVector residuals = detail::eigen_residuals(A, values, vectors);
  if (residuals.size() > 0 && residuals.maxCoeff() > tol_eig)
    throw ConvergenceFailure("matkernel", "eig_general: residual " +
                                              std::to_string(residuals.maxCoeff()) +
                                              " exceeds tolerance");
  return {std::move(values), std::move(vectors), std::move(residuals)};
}

/// Eigendecomposition of a Hermitian matrix. Degenerate spectra are fine
/// here; eigenvectors come back orthonormal and phase-fixed.
inline Spectrum eig_hermitian(const ComplexMatrix& A) {
  auto he = detail::hermitian_eigs(A, "matkernel", "eig_hermitian");
  ComplexMatrix vectors = he.vectors;
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) detail::fix_phase(vectors.col(k));
  Eigen::VectorXcd values = he.values.cast<Complex>();
  RealVector residuals = detail::eigen_residuals(A, values, vectors);
  return {std::move(values), std::move(vectors), std::move(residuals)};
}

/// exp(s*A) by Pade approximation with scaling and squaring.
inline ComplexMatrix mat_exp(const ComplexMatrix& A, Complex s = Complex(1.0, 0.0)) {
  require_square_finite(A, "matkernel", "mat_exp");
  const Eigen::Index n = A.rows();
  ComplexMatrix B = s * A;
  const double eta = B.cwiseAbs().colwise().sum().maxCoeff();  // 1-norm
  if (eta == 0.0) return ComplexMatrix::Identity(n, n);

  constexpr double theta3 = 1.495585217958292e-2;
  constexpr double theta5 = 2.539398330063230e-1;
  constexpr double theta7 = 9.504178996162932e-1;
  constexpr double theta9 = 2.097847961257068;
  constexpr double theta13 = 5.371920351148152;
  constexpr int max_squarings = 30;

  int degree = 13;
  int squarings = 0;
  if (eta <= theta3)
    degree = 3;
  else if (eta <= theta5)
    degree = 5;
  else if (eta <= theta7)
    degree = 7;
  else if (eta <= theta9)
    degree = 9;
  else if (eta > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(eta / theta13)));
    if (squarings > max_squarings)
      throw Overflow("matkernel", "mat_exp: ||s*A|| = " + std::to_string(eta) +
                                      " exceeds the scaling cap");
    B /= std::pow(2.0, squarings);
  }

  const ComplexMatrix I = ComplexMatrix::Identity(n, n);
  ComplexMatrix U(n, n), V(n, n);
  switch (degree) {
    case 3: {
      constexpr double b[] = {120., 60., 12., 1.};
      const ComplexMatrix B2 = B * B;
      U = B * (b[3] * B2 + b[1] * I);
      V = b[2] * B2 + b[0] * I;
      break;
    }
    case 5: {
      constexpr double b[] = {30240., 15120., 3360., 420., 30., 1.};
      const ComplexMatrix B2 = B * B;
      const ComplexMatrix B4 = B2 * B2;
      U = B * (b[5] * B4 + b[3] * B2 + b[1] * I);
      V = b[4] * B4 + b[2] * B2 + b[0] * I;
      break;
    }
    case 7: {
      constexpr double b[] = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
      const ComplexMatrix B2 = B * B;
      const ComplexMatrix B4 = B2 * B2;
      const ComplexMatrix B6 = B4 * B2;
      U = B * (b[7] * B6 + b[5] * B4 + b[3] * B2 + b[1] * I);
      V = b[6] * B6 + b[4] * B4 + b[2] * B2 + b[0] * I;
      break;
    }
    case 9: {
      constexpr double b[] = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                              2162160.,     110880.,      3960.,       90.,        1.};
      const ComplexMatrix B2 = B * B;
      const ComplexMatrix B4 = B2 * B2;
      const ComplexMatrix B6 = B4 * B2;
      const ComplexMatrix B8 = B6 * B2;
      U = B * (b[9] * B8 + b[7] * B6 + b[5] * B4 + b[3] * B2 + b[1] * I);
      V = b[8] * B8 + b[6] * B6 + b[4] * B4 + b[2] * B2 + b[0] * I;
      break;
    }
    default: {
      constexpr double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                              1187353796428800.,  129060195264000.,   10559470521600.,
                              670442572800.,      33522128640.,       1323241920.,
                              40840800.,          960960.,            16380.,
                              182.,               1.};
      const ComplexMatrix B2 = B * B;
      const ComplexMatrix B4 = B2 * B2;
      const ComplexMatrix B6 = B4 * B2;
      U = B * (B6 * (b[13] * B6 + b[11] * B4 + b[9] * B2) + b[7] * B6 + b[5] * B4 + b[3] * B2 +
               b[1] * I);
      V = B6 * (b[12] * B6 + b[10] * B4 + b[8] * B2) + b[6] * B6 + b[4] * B4 + b[2] * B2 + b[0] * I;
      break;
    }
  }

  ComplexMatrix X = (V - U).partialPivLu().solve(V + U);
  for (int i = 0; i < squarings; ++i) X = X * X;
  if (!X.allFinite()) throw Overflow("matkernel", "mat_exp: result overflowed");
  return X;
}

/// Principal square root of a Hermitian positive-definite matrix.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& A) {
  auto he = detail::hermitian_eigs(A, "matkernel", "psd_sqrt");
  const double floor = tol::positivity_scale * std::max(A.norm(), 1e-300);
  if (he.values.minCoeff() <= floor)
    throw NotPositiveDefinite("matkernel", "psd_sqrt: min eigenvalue " +
                                               std::to_string(he.values.minCoeff()) +
                                               " below positivity threshold");
  const RealVector roots = he.values.cwiseSqrt();
  ComplexMatrix B = he.vectors * roots.asDiagonal() * he.vectors.adjoint();
  return ((B + B.adjoint()) * 0.5).eval();
}

}  // namespace quasiherm
