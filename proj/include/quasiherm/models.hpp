#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "quasiherm/biortho.hpp"
#include "quasiherm/krein.hpp"
#include "quasiherm/metric.hpp"
#include "quasiherm/types.hpp"

namespace quasiherm {

enum class ModelFamily { PT2Cell, GainLossChain };

inline const char* to_string(ModelFamily f) {
  return f == ModelFamily::PT2Cell ? "pt2cell" : "chain";
}

struct ModelSystem {
  ComplexMatrix H;
  Pseudometric P;
};

/// Minimal gain/loss cell H = [[ia, b], [b, -ia]] with the exchange
/// pseudometric. Eigenvalues +-sqrt(b^2 - a^2): real for |a| < b, a
/// conjugate pair for |a| > b, coalescing at |a| = b.
inline ModelSystem model_pt2(double a, double b) {
  if (!(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("model_pt2: requires finite a and b > 0");
  ComplexMatrix H(2, 2);
  H << Complex(0.0, a), Complex(b, 0.0), Complex(b, 0.0), Complex(0.0, -a);
  ComplexMatrix P(2, 2);
  P << 0.0, 1.0, 1.0, 0.0;
  return {H, Pseudometric::from_matrix(P)};
}

/// Open tight-binding chain with gain +i gamma on the first site, loss
/// -i gamma on the last, uniform real coupling, and the site-reversal
/// pseudometric.
inline ModelSystem model_chain(int n, double gamma, double coupling) {
  if (n < 2 || !(coupling > 0.0) || !(gamma >= 0.0) || !std::isfinite(gamma) ||
      !std::isfinite(coupling))
    throw std::invalid_argument("model_chain: requires n >= 2, coupling > 0, gamma >= 0");
  ComplexMatrix H = ComplexMatrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    H(i, i + 1) = coupling;
    H(i + 1, i) = coupling;
  }
  H(0, 0) = Complex(0.0, gamma);
  H(n - 1, n - 1) = Complex(0.0, -gamma);
  ComplexMatrix P = ComplexMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) P(i, n - 1 - i) = 1.0;
  return {H, Pseudometric::from_matrix(P)};
}

enum class SweepVerdict { Unbroken, Broken, ExceptionalPoint };

inline const char* to_string(SweepVerdict v) {
  switch (v) {
    case SweepVerdict::Unbroken: return "Unbroken";
    case SweepVerdict::Broken: return "Broken";
    default: return "ExceptionalPoint";
  }
}

struct SweepRow {
  std::vector<double> params;  // one value per axis, in axis order
  SweepVerdict verdict = SweepVerdict::Unbroken;
  double max_im_e = std::numeric_limits<double>::quiet_NaN();
  double min_theta_eig = std::numeric_limits<double>::quiet_NaN();
};

struct SweepTable {
  ModelFamily family = ModelFamily::PT2Cell;
  std::vector<std::string> param_names;
  std::vector<SweepRow> rows;
};

/// Named axes of a parameter grid; the sweep takes their cartesian product
/// in lexicographic order.
struct ParamGrid {
  std::vector<std::pair<std::string, std::vector<double>>> axes;

  const std::vector<double>* find(const std::string& name) const {
    for (const auto& axis : axes)
      if (axis.first == name) return &axis.second;
    return nullptr;
  }
};

namespace detail {

inline std::vector<double> sorted_axis(const ParamGrid& grid, const std::string& name) {
  const auto* values = grid.find(name);
  if (!values || values->empty())
    throw InvalidGrid("models", "sweep: missing or empty axis '" + name + "'");
  std::vector<double> v = *values;
  for (double x : v)
    if (!std::isfinite(x)) throw InvalidGrid("models", "sweep: non-finite value on axis '" + name + "'");
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline SweepRow classify_point(ModelFamily family, const std::vector<double>& params,
                               double reality_tol) {
  SweepRow row;
  row.params = params;
  try {
    ModelSystem ms = family == ModelFamily::PT2Cell
                         ? model_pt2(params[0], params[1])
                         : model_chain(static_cast<int>(params[0]), params[1], params[2]);
    const BiorthogonalSystem sys = solve_biorthogonal(ms.H);
    const PTClassification cls = classify_pt(ms.H, ms.P, sys, reality_tol);
    row.max_im_e = sys.eigenvalues.imag().cwiseAbs().maxCoeff();
    if (cls.verdict == Verdict::Unbroken) {
      const PCNormalization pc = fix_pc_normalization(sys, cls, ms.P);
      const MetricOperator m = build_metric(ms.H, sys, pc.scales, reality_tol);
      row.verdict = SweepVerdict::Unbroken;
      row.min_theta_eig = m.min_eigenvalue;
    } else {
      // No positive metric exists; report the sign defect of the
      // unit-scale intertwiner candidate instead.
      const auto diag =
          intertwiner_diagnostics(ms.H, sys, RealVector::Ones(sys.dim()), reality_tol);
      row.verdict = SweepVerdict::Broken;
      row.min_theta_eig = diag.min_eigenvalue;
    }
  } catch (const DegenerateSpectrum&) {
    row.verdict = SweepVerdict::ExceptionalPoint;
  } catch (const PairingAmbiguous&) {
    row.verdict = SweepVerdict::ExceptionalPoint;
  }
  return row;
}

}  // namespace detail

/// Classify every grid point. Exceptional points are rows, not failures;
/// rows come out in lexicographic parameter order.
inline SweepTable sweep_phase_diagram(ModelFamily family, const ParamGrid& grid,
                                      double reality_tol = tol::reality) {
  SweepTable table;
  table.family = family;
  if (family == ModelFamily::PT2Cell) {
    table.param_names = {"a", "b"};
    const auto as = detail::sorted_axis(grid, "a");
    const auto bs = detail::sorted_axis(grid, "b");
    for (double a : as)
      for (double b : bs) table.rows.push_back(detail::classify_point(family, {a, b}, reality_tol));
  } else {
    table.param_names = {"n", "gamma", "coupling"};
    const auto ns = detail::sorted_axis(grid, "n");
    const auto gammas = detail::sorted_axis(grid, "gamma");
    const auto couplings = detail::sorted_axis(grid, "coupling");
    for (double n : ns)
      for (double gamma : gammas)
        for (double coupling : couplings)
          table.rows.push_back(detail::classify_point(family, {n, gamma, coupling}, reality_tol));
  }
  return table;
}

}  // namespace quasiherm
