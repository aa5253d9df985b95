#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace quasiherm;
using Catch::Approx;

namespace {

// The worked 2x2 cell (a = 0.6, b = 1.0): closed-form metric data used as
// frozen oracles below. With cos(phi) = 0.8, sin(phi) = 0.6:
//   kappa = -/+ 1/cos(phi), t_n = sqrt(cos(phi)),
//   Theta = (1/cos phi) [[1, -i sin phi], [i sin phi, 1]], eigenvalues
//   {0.5, 2}, and C = P Theta.
struct CellFixture {
  ModelSystem ms = model_pt2(0.6, 1.0);
  BiorthogonalSystem sys = solve_biorthogonal(ms.H);
  PTClassification cls = classify_pt(ms.H, ms.P, sys);

  ComplexMatrix expected_theta() const {
    ComplexMatrix t(2, 2);
    t << Complex(1.25, 0.0), Complex(0.0, -0.75), Complex(0.0, 0.75), Complex(1.25, 0.0);
    return t;
  }
  ComplexMatrix expected_c() const {
    ComplexMatrix c(2, 2);
    c << Complex(0.0, 0.75), Complex(1.25, 0.0), Complex(1.25, 0.0), Complex(0.0, -0.75);
    return c;
  }
};

}  // namespace

TEST_CASE("build_metric: Hermitian input with unit scales gives the identity", "[metric]") {
  auto gen = qhtest::rng(71);
  const ComplexMatrix H = qhtest::random_hermitian(gen, 5);
  const BiorthogonalSystem sys = solve_biorthogonal(H);
  const MetricOperator m = build_metric(H, sys, RealVector::Ones(5));
  REQUIRE((m.theta - identity_like(5)).norm() < 1e-10);
  REQUIRE(m.min_eigenvalue == Approx(1.0).margin(1e-10));
  REQUIRE(*m.quasi_h_residual < 1e-12);
}

TEST_CASE("build_metric: unbroken cell with unit scales", "[metric]") {
  CellFixture f;
  const MetricOperator m = build_metric(f.ms.H, f.sys, RealVector::Ones(2));
  // Unit scales give 1.25x the PC-normalized metric.
  REQUIRE((m.theta - 1.25 * f.expected_theta()).norm() < 1e-10);
  REQUIRE(*m.quasi_h_residual <= 1e-10);
  REQUIRE(m.min_eigenvalue == Approx(0.625).margin(1e-10));
  REQUIRE(m.hermiticity_residual < 1e-12);
  REQUIRE((m.theta * m.theta_inverse - identity_like(2)).norm() < 1e-10);
}

TEST_CASE("build_metric: broken cell has no positive metric", "[metric]") {
  const auto ms = model_pt2(1.0, 0.6);
  const BiorthogonalSystem sys = solve_biorthogonal(ms.H);
  REQUIRE_THROWS_AS(build_metric(ms.H, sys, RealVector::Ones(2)), NotPositiveDefinite);
  // Eigenvalue oracle: the intertwiner candidate is genuinely indefinite,
  // while still intertwining H with H^dagger.
  const auto diag = intertwiner_diagnostics(ms.H, sys, RealVector::Ones(2));
  REQUIRE(diag.has_conjugate_pairs);
  REQUIRE(diag.min_eigenvalue < -0.1);
  REQUIRE(diag.quasi_h_residual < 1e-12);
}

TEST_CASE("build_metric: quasi-Hermiticity is scale independent", "[metric]") {
  CellFixture f;
  auto gen = qhtest::rng(73);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int trial = 0; trial < 5; ++trial) {
    RealVector scales(2);
    scales << u(gen), u(gen);
    const MetricOperator m = build_metric(f.ms.H, f.sys, scales);
    REQUIRE(*m.quasi_h_residual <= 1e-10);
    REQUIRE(m.min_eigenvalue > 0.0);
  }
}

TEST_CASE("fix_pc_normalization: closed form on the cell", "[metric]") {
  CellFixture f;
  const PCNormalization pc = fix_pc_normalization(f.sys, f.cls, f.ms.P);
  // t_n = |kappa|^{-1/2} = sqrt(0.8)
  REQUIRE(pc.scales[0] == Approx(std::sqrt(0.8)).margin(1e-10));
  REQUIRE(pc.scales[1] == Approx(std::sqrt(0.8)).margin(1e-10));
  REQUIRE(pc.signs[0] == -1);
  REQUIRE(pc.signs[1] == 1);

  const MetricOperator m = build_metric(f.ms.H, f.sys, pc.scales);
  REQUIRE((m.theta - f.expected_theta()).norm() < 1e-10);
  // (P Theta)^2 = I once the scales are fixed.
  const ComplexMatrix C = f.ms.P.P * m.theta;
  REQUIRE((C * C - identity_like(2)).norm() <= 1e-9);
}

TEST_CASE("fix_pc_normalization: Hermitian limit and error paths", "[metric]") {
  SECTION("Hermitian H with identity P: unit scales, positive signs") {
    auto gen = qhtest::rng(79);
    const ComplexMatrix H = qhtest::random_hermitian(gen, 4);
    const Pseudometric P = Pseudometric::from_matrix(identity_like(4));
    const BiorthogonalSystem sys = solve_biorthogonal(H);
    const PTClassification cls = classify_pt(H, P, sys);
    const PCNormalization pc = fix_pc_normalization(sys, cls, P);
    for (Eigen::Index k = 0; k < 4; ++k) {
      REQUIRE(pc.scales[k] == Approx(1.0).margin(1e-9));
      REQUIRE(pc.signs[k] == 1);
    }
  }
  SECTION("negated kappa flips the recorded sign only") {
    CellFixture f;
    PTClassification tampered = f.cls;
    tampered.proportionality_constants[1] = -tampered.proportionality_constants[1];
    const PCNormalization pc = fix_pc_normalization(f.sys, tampered, f.ms.P);
    REQUIRE(pc.signs[1] == -1);
    REQUIRE(pc.scales[1] == Approx(std::sqrt(0.8)).margin(1e-9));
  }
  SECTION("broken phase is refused") {
    const auto ms = model_pt2(1.0, 0.6);
    const BiorthogonalSystem sys = solve_biorthogonal(ms.H);
    const PTClassification cls = classify_pt(ms.H, ms.P, sys);
    REQUIRE_THROWS_AS(fix_pc_normalization(sys, cls, ms.P), BrokenPhase);
  }
  SECTION("complex kappa is refused") {
    CellFixture f;
    PTClassification tampered = f.cls;
    tampered.proportionality_constants[0] = Complex(0.3, 1.0);
    REQUIRE_THROWS_AS(fix_pc_normalization(f.sys, tampered, f.ms.P), ComplexKappa);
  }
}

TEST_CASE("build_c_operator: involutivity with and without the PC fix", "[metric]") {
  CellFixture f;
  SECTION("textbook limit") {
    const MetricOperator m = metric_from_matrix(identity_like(2));
    const Pseudometric P = Pseudometric::from_matrix(identity_like(2));
    const COperator c = build_c_operator(m, P);
    REQUIRE((c.C - identity_like(2)).norm() < 1e-14);
    REQUIRE(c.involutivity_residual < 1e-14);
  }
  SECTION("fixed scales: certified involution, commutes with H") {
    const PCNormalization pc = fix_pc_normalization(f.sys, f.cls, f.ms.P);
    const MetricOperator m = build_metric(f.ms.H, f.sys, pc.scales);
    const COperator c = build_c_operator(m, f.ms.P, 1e-9);
    REQUIRE((c.C - f.expected_c()).norm() < 1e-10);
    REQUIRE(c.involutivity_residual <= 1e-9);
    REQUIRE(commutator_residual(c.C, f.ms.H) < 1e-12);
  }
  SECTION("unit scales: the ambiguity the constraint removes") {
    const MetricOperator m = build_metric(f.ms.H, f.sys, RealVector::Ones(2));
    const COperator c = build_c_operator(m, f.ms.P);
    // ||C^2 - I|| = (kappa^2 - 1) * sqrt(2) = 0.5625 * sqrt(2)
    REQUIRE(c.involutivity_residual == Approx(0.5625 * std::sqrt(2.0)).margin(1e-9));
    REQUIRE_THROWS_AS(build_c_operator(m, f.ms.P, 1e-9), InvolutivityViolated);
  }
}

TEST_CASE("theta = P C holds entrywise after the PC fix", "[metric]") {
  CellFixture f;
  const PCNormalization pc = fix_pc_normalization(f.sys, f.cls, f.ms.P);
  const MetricOperator m = build_metric(f.ms.H, f.sys, pc.scales);
  const COperator c = build_c_operator(m, f.ms.P);
  REQUIRE((m.theta - f.ms.P.P * c.C).norm() <= 1e-9);
}

TEST_CASE("s_adjoint: known images and algebraic laws", "[metric]") {
  CellFixture f;
  const PCNormalization pc = fix_pc_normalization(f.sys, f.cls, f.ms.P);
  const MetricOperator m = build_metric(f.ms.H, f.sys, pc.scales);

  SECTION("identity metric reduces to the plain adjoint") {
    auto gen = qhtest::rng(83);
    const ComplexMatrix X = qhtest::random_matrix(gen, 3);
    const MetricOperator id = identity_metric(3);
    REQUIRE((s_adjoint(X, id) - X.adjoint()).norm() < 1e-14);
  }
  SECTION("H is self-adjoint in the metric sense") {
    REQUIRE((s_adjoint(f.ms.H, m) - f.ms.H).norm() <= 1e-9);
  }
  SECTION("iH is anti-self-adjoint") {
    const ComplexMatrix iH = Complex(0.0, 1.0) * f.ms.H;
    REQUIRE((s_adjoint(iH, m) + iH).norm() <= 1e-9);
  }
  SECTION("involution and product reversal") {
    auto gen = qhtest::rng(89);
    const ComplexMatrix X = qhtest::random_matrix(gen, 2);
    const ComplexMatrix Y = qhtest::random_matrix(gen, 2);
    REQUIRE((s_adjoint(s_adjoint(X, m), m) - X).norm() <= 1e-10 * X.norm());
    REQUIRE((s_adjoint(X * Y, m) - s_adjoint(Y, m) * s_adjoint(X, m)).norm() <= 1e-9);
  }
}

TEST_CASE("observable_compatibility: admissible and inadmissible observables", "[metric]") {
  CellFixture f;
  const PCNormalization pc = fix_pc_normalization(f.sys, f.cls, f.ms.P);
  const MetricOperator m = build_metric(f.ms.H, f.sys, pc.scales);
  const COperator c = build_c_operator(m, f.ms.P);

  ComplexMatrix nilpotent = ComplexMatrix::Zero(2, 2);
  nilpotent(0, 1) = 1.0;

  const auto res = observable_compatibility({identity_like(2), c.C, nilpotent}, m);
  REQUIRE(res[0] == 0.0);
  REQUIRE(res[1] <= 1e-9);
  // A non-normal nilpotent cannot be self-adjoint under any positive
  // metric; by direct multiplication the value here is 1.1246.
  REQUIRE(res[2] > 0.1);
  REQUIRE(res[2] == Approx(1.1246).margin(1e-3));
}

TEST_CASE("metric_from_matrix: validation", "[metric]") {
  ComplexMatrix D = ComplexMatrix::Zero(2, 2);
  D(0, 0) = 4.0;
  D(1, 1) = 1.0;
  const MetricOperator m = metric_from_matrix(D);
  REQUIRE(m.min_eigenvalue == Approx(1.0));
  REQUIRE(m.max_eigenvalue == Approx(4.0));
  REQUIRE((m.theta_inverse * m.theta - identity_like(2)).norm() < 1e-13);

  ComplexMatrix indef = ComplexMatrix::Zero(2, 2);
  indef(0, 0) = 1.0;
  indef(1, 1) = -2.0;
  REQUIRE_THROWS_AS(metric_from_matrix(indef), NotPositiveDefinite);
}
