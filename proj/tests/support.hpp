#pragma once

// Shared test helpers: deterministic random data, independent oracles, and
// the instance sampler used by the acceptance suite.

#include <random>
#include <string>
#include <vector>

#include "quasiherm/quasiherm.hpp"

namespace qhtest {

using namespace quasiherm;

inline std::mt19937_64 rng(unsigned seed) { return std::mt19937_64(seed); }

inline ComplexMatrix random_matrix(std::mt19937_64& gen, Eigen::Index n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ComplexMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = Complex(u(gen), u(gen));
  return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& gen, Eigen::Index n, double scale = 1.0) {
  const ComplexMatrix m = random_matrix(gen, n, scale);
  return ((m + m.adjoint()) * 0.5).eval();
}

inline ComplexVector random_vector(std::mt19937_64& gen, Eigen::Index n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(u(gen), u(gen));
  return v;
}

inline ComplexVector random_unit_vector(std::mt19937_64& gen, Eigen::Index n) {
  ComplexVector v = random_vector(gen, n);
  while (v.norm() == 0.0) v = random_vector(gen, n);
  return v / v.norm();
}

// Independent reality check: direct eigenvalue computation, no toolkit
// classification machinery involved.
inline bool spectrum_is_real(const ComplexMatrix& H, double reality_tol = 1e-9) {
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(H, false);
  return solver.eigenvalues().imag().cwiseAbs().maxCoeff() <= reality_tol * H.norm();
}

inline double min_eigen_gap(const ComplexMatrix& H) {
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(H, false);
  const auto& e = solver.eigenvalues();
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < e.size(); ++i)
    for (Eigen::Index j = i + 1; j < e.size(); ++j)
      gap = std::min(gap, std::abs(e[i] - e[j]));
  return gap;
}

// Classical RK4 on dpsi/dt = -i H psi; an integration-based oracle for the
// exact-exponential propagation path.
inline ComplexVector rk4_evolve(const ComplexMatrix& H, ComplexVector psi, double t_final,
                                int steps) {
  const double dt = t_final / steps;
  const Complex mi(0.0, -1.0);
  for (int k = 0; k < steps; ++k) {
    const ComplexVector k1 = mi * (H * psi);
    const ComplexVector k2 = mi * (H * (psi + 0.5 * dt * k1));
    const ComplexVector k3 = mi * (H * (psi + 0.5 * dt * k2));
    const ComplexVector k4 = mi * (H * (psi + dt * k3));
    psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return psi;
}

struct Instance {
  std::string name;
  ComplexMatrix H;
  Pseudometric P;
};

// Unbroken benchmark instances, dims 2..12. A few canonical systems come
// first (they anchor the negative controls); the rest are rejection-sampled
// against the independent reality check with a safety margin away from
// exceptional points.
inline std::vector<Instance> unbroken_instances(unsigned seed, int count) {
  std::vector<Instance> out;
  {
    auto ms = model_pt2(0.6, 1.0);
    out.push_back({"pt2(a=0.6,b=1)", ms.H, ms.P});
  }
  {
    auto ms = model_pt2(0.45, 0.5);
    out.push_back({"pt2(a=0.45,b=0.5)", ms.H, ms.P});
  }
  {
    auto ms = model_chain(6, 0.3, 1.0);
    out.push_back({"chain(n=6,g=0.3,c=1)", ms.H, ms.P});
  }
  {
    auto ms = model_chain(12, 0.2, 1.0);
    out.push_back({"chain(n=12,g=0.2,c=1)", ms.H, ms.P});
  }

  auto gen = rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int n_site = 2;
  while (static_cast<int>(out.size()) < count) {
    const bool use_cell = (n_site == 2) && (unit(gen) < 0.5);
    ModelSystem ms = [&] {
      if (use_cell) {
        const double b = 0.5 + 1.5 * unit(gen);
        const double a = 0.85 * b * unit(gen);
        return model_pt2(a, b);
      }
      const double coupling = 0.5 + 1.5 * unit(gen);
      const double gamma = 0.5 * coupling * unit(gen);
      return model_chain(n_site, gamma, coupling);
    }();
    n_site = n_site == 12 ? 2 : n_site + 1;
    if (!spectrum_is_real(ms.H, 1e-12)) continue;
    if (min_eigen_gap(ms.H) < 1e-4 * ms.H.norm()) continue;
    out.push_back({"sampled dim " + std::to_string(ms.H.rows()), ms.H, ms.P});
  }
  return out;
}

}  // namespace qhtest
