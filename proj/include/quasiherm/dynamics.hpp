#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "quasiherm/dyson.hpp"
#include "quasiherm/matkernel.hpp"
#include "quasiherm/metric.hpp"
#include "quasiherm/types.hpp"

namespace quasiherm {

/// Schroedinger-picture trajectory with both norm bookkeepings: s_norms
/// use the metric supplied for the run, f_norms the plain 2-norm.
struct StateTrajectory {
  std::vector<double> times;
  std::vector<ComplexVector> states;
  RealVector s_norms;
  RealVector f_norms;
};

/// Heisenberg-picture trajectory: the state is frozen, the operator moves.
struct OperatorTrajectory {
  std::vector<double> times;
  std::vector<ComplexMatrix> operators;
};

/// The dual evolution rule. `standard` is X(t) = e^{iHt} X e^{-iHt} (the
/// same generator on both sides), which is the unique rule consistent with
/// the Schroedinger picture under the metric inner product. The
/// `mixed_adjoint` variant e^{iHt} X e^{-iH^dagger t} looks plausible and
/// is kept as a negative control: it breaks two-picture agreement.
enum class HeisenbergRule { standard, mixed_adjoint };

namespace detail {

inline void validate_grid(const std::vector<double>& t, const std::string& module,
                          const char* op) {
  if (t.empty()) throw InvalidGrid(module, std::string(op) + ": empty time grid");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i])) throw InvalidGrid(module, std::string(op) + ": non-finite time");
    if (i > 0 && !(t[i] > t[i - 1]))
      throw InvalidGrid(module, std::string(op) + ": grid not strictly increasing at node " +
                                    std::to_string(i));
  }
}

inline bool uniform_spacing(const std::vector<double>& t) {
  if (t.size() < 3) return t.size() == 2;
  const double dt = t[1] - t[0];
  for (std::size_t i = 2; i < t.size(); ++i)
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-12 * std::max(1.0, std::abs(t.back()))) return false;
  return true;
}

}  // namespace detail

inline Complex s_inner(const ComplexVector& phi, const ComplexVector& psi,
                       const MetricOperator& theta) {
  require_same_dim(phi.size(), psi.size(), "dynamics", "s_inner");
  require_same_dim(phi.size(), theta.dim(), "dynamics", "s_inner");
  return phi.dot(theta.theta * psi);
}

inline double s_norm(const ComplexVector& psi, const MetricOperator& theta) {
  return std::sqrt(std::max(0.0, s_inner(psi, psi, theta).real()));
}

/// Propagate psi(t) = e^{-iHt} psi0 across the grid, recording both norms
/// at every node. Exact exponential propagation; a uniform grid reuses the
/// one-step propagator.
inline StateTrajectory evolve_schrodinger(const ComplexMatrix& H, const ComplexVector& psi0,
                                          const std::vector<double>& t_grid,
                                          const MetricOperator& theta) {
  require_square_finite(H, "dynamics", "evolve_schrodinger");
  require_same_dim(H.rows(), psi0.size(), "dynamics", "evolve_schrodinger");
  require_same_dim(H.rows(), theta.dim(), "dynamics", "evolve_schrodinger");
  detail::validate_grid(t_grid, "dynamics", "evolve_schrodinger");
  if (psi0.norm() == 0.0)
    throw DimensionMismatch("dynamics", "evolve_schrodinger: initial state is zero");

  const std::size_t nodes = t_grid.size();
  StateTrajectory traj;
  traj.times = t_grid;
  traj.states.reserve(nodes);
  traj.s_norms.resize(static_cast<Eigen::Index>(nodes));
  traj.f_norms.resize(static_cast<Eigen::Index>(nodes));

  const bool uniform = detail::uniform_spacing(t_grid);
  ComplexMatrix step;
  if (uniform && nodes > 1) step = mat_exp(H, Complex(0.0, -(t_grid[1] - t_grid[0])));

  ComplexVector psi = mat_exp(H, Complex(0.0, -t_grid[0])) * psi0;
  for (std::size_t k = 0; k < nodes; ++k) {
    if (k > 0) psi = uniform ? (step * psi).eval() : (mat_exp(H, Complex(0.0, -t_grid[k])) * psi0).eval();
    if (!psi.allFinite())
      throw Overflow("dynamics", "evolve_schrodinger: state overflowed at t = " +
                                     std::to_string(t_grid[k]));
    traj.states.push_back(psi);
    traj.s_norms[static_cast<Eigen::Index>(k)] = s_norm(psi, theta);
    traj.f_norms[static_cast<Eigen::Index>(k)] = psi.norm();
  }
  return traj;
}

/// Propagate X(t) = e^{iHt} X e^{-iHt} (or the mixed_adjoint control rule)
/// across the grid.
inline OperatorTrajectory evolve_heisenberg(const ComplexMatrix& H, const ComplexMatrix& X,
                                            const std::vector<double>& t_grid,
                                            HeisenbergRule rule = HeisenbergRule::standard) {
  require_square_finite(H, "dynamics", "evolve_heisenberg");
  require_square_finite(X, "dynamics", "evolve_heisenberg");
  require_same_dim(H.rows(), X.rows(), "dynamics", "evolve_heisenberg");
  detail::validate_grid(t_grid, "dynamics", "evolve_heisenberg");

  const ComplexMatrix right_gen =
      rule == HeisenbergRule::standard ? H : ComplexMatrix(H.adjoint());

  OperatorTrajectory traj;
  traj.times = t_grid;
  traj.operators.reserve(t_grid.size());

  const bool uniform = detail::uniform_spacing(t_grid);
  ComplexMatrix left_step, right_step;
  if (uniform && t_grid.size() > 1) {
    const double dt = t_grid[1] - t_grid[0];
    left_step = mat_exp(H, Complex(0.0, dt));
    right_step = mat_exp(right_gen, Complex(0.0, -dt));
  }

  ComplexMatrix current = mat_exp(H, Complex(0.0, t_grid[0])) * X *
                          mat_exp(right_gen, Complex(0.0, -t_grid[0]));
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (k > 0)
      current = uniform ? ComplexMatrix(left_step * current * right_step)
                        : ComplexMatrix(mat_exp(H, Complex(0.0, t_grid[k])) * X *
                                        mat_exp(right_gen, Complex(0.0, -t_grid[k])));
    if (!current.allFinite())
      throw Overflow("dynamics", "evolve_heisenberg: operator overflowed at t = " +
                                     std::to_string(t_grid[k]));
    traj.operators.push_back(current);
  }
  return traj;
}

/// ||e^{iH^dagger t} - Theta e^{iHt} Theta^{-1}|| (normalized). Zero for a
/// certified metric: the exponentials inherit the intertwining relation.
inline double exp_intertwine_residual(const ComplexMatrix& H, const MetricOperator& theta,
                                      double t) {
  require_square_finite(H, "dynamics", "exp_intertwine_residual");
  require_same_dim(H.rows(), theta.dim(), "dynamics", "exp_intertwine_residual");
  if (t == 0.0) return 0.0;  // both sides are the identity
  const ComplexMatrix lhs = mat_exp(H.adjoint().eval(), Complex(0.0, t));
  const ComplexMatrix rhs = theta.theta * mat_exp(H, Complex(0.0, t)) * theta.theta_inverse;
  return (lhs - rhs).norm() / std::max(lhs.norm(), 1e-300);
}

/// Evolve the two pictures independently and return the worst mismatch of
/// <phi(t), X psi(t)>_S against <phi(0), X(t) psi(0)>_S over the grid.
inline double expectation_consistency(const ComplexMatrix& H, const ComplexMatrix& X,
                                      const ComplexVector& phi0, const ComplexVector& psi0,
                                      const MetricOperator& theta,
                                      const std::vector<double>& t_grid,
                                      HeisenbergRule rule = HeisenbergRule::standard) {
  require_square_finite(X, "dynamics", "expectation_consistency");
  require_same_dim(X.rows(), H.rows(), "dynamics", "expectation_consistency");
  const StateTrajectory phi_traj = evolve_schrodinger(H, phi0, t_grid, theta);
  const StateTrajectory psi_traj = evolve_schrodinger(H, psi0, t_grid, theta);
  const OperatorTrajectory x_traj = evolve_heisenberg(H, X, t_grid, rule);

  double worst = 0.0;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const Complex schrodinger =
        phi_traj.states[k].dot(theta.theta * (X * psi_traj.states[k]));
    const Complex heisenberg = phi0.dot(theta.theta * (x_traj.operators[k] * psi0));
    worst = std::max(worst, std::abs(schrodinger - heisenberg));
  }
  return worst;
}

/// Least-squares slope of log f_norm over the grid; the growth exponent of
/// a broken-phase run (zero for norm-preserving evolution).
inline double f_norm_growth_rate(const StateTrajectory& traj) {
  const Eigen::Index n = static_cast<Eigen::Index>(traj.times.size());
  if (n < 2) return 0.0;
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  Eigen::Index used = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double f = traj.f_norms[k];
    if (!(f > 0.0)) continue;
    const double t = traj.times[static_cast<std::size_t>(k)];
    const double y = std::log(f);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++used;
  }
  if (used < 2) return 0.0;
  const double denom = used * stt - st * st;
  return denom == 0.0 ? 0.0 : (used * sty - st * sy) / denom;
}

}  // namespace quasiherm
