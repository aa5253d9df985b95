#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "quasiherm/biortho.hpp"
#include "quasiherm/dyson.hpp"
#include "quasiherm/io.hpp"
#include "quasiherm/krein.hpp"
#include "quasiherm/matkernel.hpp"
#include "quasiherm/metric.hpp"
#include "quasiherm/models.hpp"
#include "quasiherm/types.hpp"

namespace quasiherm {

struct AnalyzeOptions {
  double tol_eig = 0.0;  // 0 -> dimension/norm scaled default
  double tol_reality = tol::reality;
  double tol_cert = tol::certification;
};

/// One named certificate: a numeric claim plus the gate it must pass.
struct Certificate {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool larger_is_better = false;
  bool passed = false;
};

/// Everything the analyze pipeline establishes, both as typed artifacts
/// (reused by evolve) and as a machine-readable report.
struct AnalysisOutcome {
  Eigen::Index dim = 0;
  Verdict verdict = Verdict::Unbroken;
  int exit_code = 0;
  std::vector<Certificate> certificates;

  BiorthogonalSystem sys;
  std::optional<double> pseudo_h_residual;
  std::optional<PTClassification> classification;
  std::optional<PCNormalization> pc;
  std::optional<MetricOperator> metric;
  std::optional<COperator> c_operator;
  std::optional<double> c_commutator_residual;
  std::optional<DysonMap> dyson;
  std::optional<ComplexMatrix> hermitized;
  std::optional<Eigen::VectorXcd> hermitized_spectrum;
  std::optional<IntertwinerDiagnostics> broken_diagnostics;

  bool certified() const {
    for (const auto& c : certificates)
      if (!c.passed) return false;
    return true;
  }
};

namespace detail {

inline void add_cert(AnalysisOutcome& out, const std::string& name, double value,
                     double threshold, bool larger_is_better = false) {
  Certificate c;
  c.name = name;
  c.value = value;
  c.threshold = threshold;
  c.larger_is_better = larger_is_better;
  c.passed = larger_is_better ? value > threshold : value <= threshold;
  out.certificates.push_back(std::move(c));
}

}  // namespace detail

/// Run the full pipeline: pseudo-Hermiticity check, biorthogonal solve,
/// dichotomy classification, PC-normalized metric, C operator, Dyson map
/// and hermitization. Without a pseudometric the classification reduces to
/// the spectral reality check and the metric keeps unit scales.
inline AnalysisOutcome run_analysis(const ComplexMatrix& H, const Pseudometric* P,
                                    const AnalyzeOptions& opts = {}) {
  require_square_finite(H, "cli", "analyze");
  AnalysisOutcome out;
  out.dim = H.rows();
  const double hnorm = H.norm();

  if (P) {
    require_same_dim(H.rows(), P->dim(), "cli", "analyze");
    out.pseudo_h_residual = pseudo_hermiticity_residual(H, *P);
    detail::add_cert(out, "pseudo_hermiticity_residual", *out.pseudo_h_residual, opts.tol_cert);
  }

  out.sys = solve_biorthogonal(H, opts.tol_eig);
  detail::add_cert(out, "gram_residual", out.sys.gram_residual, opts.tol_cert);

  if (P) {
    out.classification = classify_pt(H, *P, out.sys, opts.tol_reality);
    out.verdict = out.classification->verdict;
  } else {
    const double max_im = out.sys.eigenvalues.imag().cwiseAbs().maxCoeff();
    out.verdict = max_im <= opts.tol_reality * hnorm ? Verdict::Unbroken : Verdict::Broken;
  }

  if (out.verdict == Verdict::Broken) {
    out.broken_diagnostics =
        intertwiner_diagnostics(H, out.sys, RealVector::Ones(out.dim), opts.tol_reality);
    out.exit_code = 2;
    return out;
  }

  RealVector scales = RealVector::Ones(out.dim);
  if (P && out.classification) {
    out.pc = fix_pc_normalization(out.sys, *out.classification, *P);
    scales = out.pc->scales;
  }

  out.metric = build_metric(H, out.sys, scales, opts.tol_reality);
  detail::add_cert(out, "theta_quasi_hermiticity_residual", *out.metric->quasi_h_residual,
                   opts.tol_cert);
  detail::add_cert(out, "theta_min_eigenvalue", out.metric->min_eigenvalue,
                   tol::positivity_scale * out.metric->theta.norm(), true);
  detail::add_cert(out, "theta_inverse_residual",
                   (out.metric->theta * out.metric->theta_inverse - identity_like(out.dim)).norm(),
                   opts.tol_cert);

  if (P) {
    out.c_operator = build_c_operator(*out.metric, *P);
    detail::add_cert(out, "c_involutivity_residual", out.c_operator->involutivity_residual,
                     opts.tol_cert);
    out.c_commutator_residual = commutator_residual(out.c_operator->C, H);
    const auto compat = observable_compatibility({out.c_operator->C}, *out.metric);
    detail::add_cert(out, "c_observable_compatibility", compat[0], opts.tol_cert);
  }

  out.dyson = dyson_from_metric(*out.metric);
  detail::add_cert(out, "dyson_factorization_residual",
                   out.dyson->factorization_residual / std::max(out.metric->theta.norm(), 1e-300),
                   opts.tol_cert);

  out.hermitized = hermitize(H, *out.dyson);
  const double h_res = (*out.hermitized - out.hermitized->adjoint()).norm() /
                       std::max(out.hermitized->norm(), 1e-300);
  detail::add_cert(out, "hermitized_hermiticity_residual", h_res, opts.tol_cert);
  out.hermitized_spectrum = eig_hermitian(*out.hermitized).eigenvalues;

  out.exit_code = out.certified() ? 0 : 1;
  return out;
}

/// Machine-readable report. Key order is fixed, doubles serialize with
/// shortest-round-trip digits, so identical inputs give identical bytes.
inline nlohmann::ordered_json analysis_to_json(const AnalysisOutcome& out) {
  using ordered_json = nlohmann::ordered_json;
  ordered_json j;
  j["tool"] = "quasiherm analyze";
  j["dim"] = out.dim;
  j["verdict"] = to_string(out.verdict);
  j["exit_code"] = out.exit_code;

  auto eigs = ordered_json::array();
  for (Eigen::Index k = 0; k < out.sys.eigenvalues.size(); ++k)
    eigs.push_back({out.sys.eigenvalues[k].real(), out.sys.eigenvalues[k].imag()});
  j["eigenvalues"] = std::move(eigs);

  if (out.classification) {
    ordered_json cls;
    cls["verdict"] = to_string(out.classification->verdict);
    cls["real_flags"] = out.classification->real_flags;
    auto pairing = ordered_json::array();
    for (auto m : out.classification->pairing) pairing.push_back(static_cast<long long>(m));
    cls["pairing"] = std::move(pairing);
    auto kappa = ordered_json::array();
    for (Eigen::Index k = 0; k < out.classification->proportionality_constants.size(); ++k)
      kappa.push_back({out.classification->proportionality_constants[k].real(),
                       out.classification->proportionality_constants[k].imag()});
    cls["proportionality_constants"] = std::move(kappa);
    j["classification"] = std::move(cls);
  }

  ordered_json certs;
  for (const auto& c : out.certificates) {
    ordered_json entry;
    entry["value"] = c.value;
    entry["threshold"] = c.threshold;
    entry["relation"] = c.larger_is_better ? ">" : "<=";
    entry["passed"] = c.passed;
    certs[c.name] = std::move(entry);
  }
  j["certificates"] = std::move(certs);
  j["certified"] = out.certified();

  if (out.pc) {
    ordered_json pc;
    pc["scales"] = std::vector<double>(out.pc->scales.data(),
                                       out.pc->scales.data() + out.pc->scales.size());
    pc["signs"] = std::vector<int>(out.pc->signs.data(), out.pc->signs.data() + out.pc->signs.size());
    j["pc_normalization"] = std::move(pc);
  }
  if (out.c_commutator_residual) j["c_commutator_residual"] = *out.c_commutator_residual;
  if (out.metric) {
    j["theta_min_eigenvalue"] = out.metric->min_eigenvalue;
    j["theta_condition"] = out.metric->max_eigenvalue / out.metric->min_eigenvalue;
  }
  if (out.dyson) j["dyson_condition"] = out.dyson->condition;
  if (out.hermitized_spectrum) {
    auto hs = ordered_json::array();
    for (Eigen::Index k = 0; k < out.hermitized_spectrum->size(); ++k)
      hs.push_back((*out.hermitized_spectrum)[k].real());
    j["hermitized_spectrum"] = std::move(hs);
  }
  if (out.broken_diagnostics) {
    ordered_json b;
    b["intertwiner_min_eigenvalue"] = out.broken_diagnostics->min_eigenvalue;
    b["intertwiner_quasi_h_residual"] = out.broken_diagnostics->quasi_h_residual;
    b["note"] = "no positive metric exists for a broken spectrum";
    j["broken_diagnostics"] = std::move(b);
  }
  return j;
}

/// Human-readable rendering of the same data.
inline std::string analysis_to_text(const AnalysisOutcome& out) {
  std::ostringstream s;
  s << "verdict: " << to_string(out.verdict) << "\n";
  s << "dim: " << out.dim << "\n";
  s << "eigenvalues:\n";
  for (Eigen::Index k = 0; k < out.sys.eigenvalues.size(); ++k) {
    const Complex e = out.sys.eigenvalues[k];
    s << "  E_" << k << " = " << format_g17(e.real()) << (e.imag() < 0 ? " - " : " + ")
      << format_g17(std::abs(e.imag())) << "i";
    if (out.classification) {
      if (out.classification->real_flags[static_cast<std::size_t>(k)])
        s << "   [real, kappa = "
          << format_g17(out.classification->proportionality_constants[k].real()) << "]";
      else
        s << "   [conjugate partner: mode "
          << out.classification->pairing[static_cast<std::size_t>(k)] << "]";
    }
    s << "\n";
  }
  s << "certificates:\n";
  for (const auto& c : out.certificates)
    s << "  " << (c.passed ? "pass" : "FAIL") << "  " << c.name << " = " << format_g17(c.value)
      << "  (" << (c.larger_is_better ? "> " : "<= ") << format_g17(c.threshold) << ")\n";
  if (out.pc) {
    s << "pc_normalization:\n";
    for (Eigen::Index k = 0; k < out.pc->scales.size(); ++k)
      s << "  mode " << k << ": scale = " << format_g17(out.pc->scales[k])
        << ", sign = " << (out.pc->signs[k] > 0 ? "+1" : "-1") << "\n";
  }
  if (out.c_commutator_residual)
    s << "c_commutator_residual: " << format_g17(*out.c_commutator_residual) << "\n";
  if (out.hermitized_spectrum) {
    s << "hermitized_spectrum:";
    for (Eigen::Index k = 0; k < out.hermitized_spectrum->size(); ++k)
      s << " " << format_g17((*out.hermitized_spectrum)[k].real());
    s << "\n";
  }
  if (out.broken_diagnostics) {
    s << "broken_diagnostics:\n";
    s << "  intertwiner_min_eigenvalue = "
      << format_g17(out.broken_diagnostics->min_eigenvalue) << "\n";
    s << "  note: no positive metric exists for a broken spectrum\n";
  }
  s << "exit_code: " << out.exit_code << "\n";
  return s.str();
}

}  // namespace quasiherm
