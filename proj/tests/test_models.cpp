#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace quasiherm;
using Catch::Approx;

TEST_CASE("model_pt2: construction and exact intertwining", "[models]") {
  const auto ms = model_pt2(0.6, 1.0);
  REQUIRE(ms.H(0, 0) == Complex(0.0, 0.6));
  REQUIRE(ms.H(0, 1) == Complex(1.0, 0.0));
  REQUIRE(ms.H(1, 1) == Complex(0.0, -0.6));
  REQUIRE(pseudo_hermiticity_residual(ms.H, ms.P) < 1e-14);

  SECTION("a = 0 is Hermitian and trivially unbroken") {
    const auto herm = model_pt2(0.0, 1.3);
    REQUIRE((herm.H - herm.H.adjoint()).norm() == 0.0);
    REQUIRE(qhtest::spectrum_is_real(herm.H));
  }
  SECTION("a = b is the exceptional point") {
    const auto ep = model_pt2(0.7, 0.7);
    REQUIRE_THROWS_AS(solve_biorthogonal(ep.H), DegenerateSpectrum);
  }
  SECTION("domain validation") { REQUIRE_THROWS_AS(model_pt2(0.5, 0.0), std::invalid_argument); }
}

TEST_CASE("model_chain: construction and exact intertwining", "[models]") {
  const auto ms = model_chain(5, 0.4, 1.2);
  REQUIRE(ms.H.rows() == 5);
  REQUIRE(ms.H(0, 0) == Complex(0.0, 0.4));
  REQUIRE(ms.H(4, 4) == Complex(0.0, -0.4));
  REQUIRE(ms.H(1, 2) == Complex(1.2, 0.0));
  REQUIRE(ms.H(2, 2) == Complex(0.0, 0.0));
  REQUIRE(pseudo_hermiticity_residual(ms.H, ms.P) < 1e-14);
  REQUIRE((ms.P.P * ms.P.P - identity_like(5)).norm() == 0.0);

  SECTION("random parameters intertwine exactly") {
    auto gen = qhtest::rng(139);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
      const auto m = model_chain(2 + trial, u(gen), u(gen));
      REQUIRE(pseudo_hermiticity_residual(m.H, m.P) < 1e-14);
    }
  }
  SECTION("gamma = 0 is the Hermitian hopping chain") {
    const auto herm = model_chain(7, 0.0, 1.0);
    REQUIRE((herm.H - herm.H.adjoint()).norm() == 0.0);
    REQUIRE(qhtest::spectrum_is_real(herm.H));
  }
  SECTION("n = 2 reduces to the cell") {
    const auto m = model_chain(2, 0.6, 1.0);
    const Spectrum s = eig_general(m.H);
    REQUIRE(s.eigenvalues[0].real() == Approx(-0.8).margin(1e-12));
    REQUIRE(s.eigenvalues[1].real() == Approx(0.8).margin(1e-12));
  }
  SECTION("n = 2 with gamma > coupling is broken") {
    const auto m = model_chain(2, 1.5, 1.0);
    REQUIRE_FALSE(qhtest::spectrum_is_real(m.H));
  }
  SECTION("n = 3 closed form: eigenvalues 0, +-sqrt(2 c^2 - gamma^2)") {
    const auto m = model_chain(3, 1.0, 1.0);
    const Spectrum s = eig_general(m.H);
    REQUIRE(s.eigenvalues[0].real() == Approx(-1.0).margin(1e-12));
    REQUIRE(std::abs(s.eigenvalues[1]) < 1e-12);
    REQUIRE(s.eigenvalues[2].real() == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("model_chain: gamma = 0 gives the identity metric through the pipeline", "[models]") {
  const auto ms = model_chain(6, 0.0, 1.0);
  const BiorthogonalSystem sys = solve_biorthogonal(ms.H);
  const PTClassification cls = classify_pt(ms.H, ms.P, sys);
  REQUIRE(cls.verdict == Verdict::Unbroken);
  const PCNormalization pc = fix_pc_normalization(sys, cls, ms.P);
  const MetricOperator m = build_metric(ms.H, sys, pc.scales);
  REQUIRE((m.theta - identity_like(6)).norm() <= 1e-10);
  // Site-reversal parity of each chain mode shows up as the kappa sign.
  int minus = 0;
  for (Eigen::Index k = 0; k < 6; ++k) minus += pc.signs[k] < 0 ? 1 : 0;
  REQUIRE(minus == 3);
}

TEST_CASE("sweep_phase_diagram: verdict sequence across the boundary", "[models]") {
  ParamGrid grid;
  grid.axes.push_back({"a", {0.0, 0.5, 1.5}});
  grid.axes.push_back({"b", {1.0}});
  const SweepTable table = sweep_phase_diagram(ModelFamily::PT2Cell, grid);
  REQUIRE(table.rows.size() == 3);
  REQUIRE(table.rows[0].verdict == SweepVerdict::Unbroken);
  REQUIRE(table.rows[1].verdict == SweepVerdict::Unbroken);
  REQUIRE(table.rows[2].verdict == SweepVerdict::Broken);
  REQUIRE(table.rows[0].max_im_e < 1e-12);
  REQUIRE(table.rows[2].max_im_e == Approx(std::sqrt(1.5 * 1.5 - 1.0)).margin(1e-10));
  REQUIRE(table.rows[2].min_theta_eig < 0.0);
}

TEST_CASE("sweep_phase_diagram: the exceptional point is a row, not a failure", "[models]") {
  ParamGrid grid;
  grid.axes.push_back({"a", {0.0, 0.5, 1.0, 1.5}});
  grid.axes.push_back({"b", {1.0}});
  const SweepTable table = sweep_phase_diagram(ModelFamily::PT2Cell, grid);
  REQUIRE(table.rows.size() == 4);
  REQUIRE(table.rows[2].verdict == SweepVerdict::ExceptionalPoint);
  REQUIRE(std::isnan(table.rows[2].max_im_e));
  REQUIRE(table.rows[3].verdict == SweepVerdict::Broken);
}

TEST_CASE("sweep_phase_diagram: boundary bracketed under refinement", "[models]") {
  // Bisection-style oracle: near a = b = 1 the verdict must flip within
  // one grid cell of the closed-form boundary.
  std::vector<double> as;
  for (int k = 0; k <= 40; ++k) as.push_back(0.8 + 0.01 * k);
  ParamGrid grid;
  grid.axes.push_back({"a", as});
  grid.axes.push_back({"b", {1.0}});
  const SweepTable table = sweep_phase_diagram(ModelFamily::PT2Cell, grid);
  double max_unbroken = -1.0, min_broken = 2.0;
  for (const auto& row : table.rows) {
    if (row.verdict == SweepVerdict::Unbroken) max_unbroken = std::max(max_unbroken, row.params[0]);
    if (row.verdict == SweepVerdict::Broken) min_broken = std::min(min_broken, row.params[0]);
  }
  REQUIRE(max_unbroken < 1.0);
  REQUIRE(min_broken > 1.0);
  REQUIRE(min_broken - max_unbroken <= 0.02 + 1e-12);
}

TEST_CASE("sweep_phase_diagram: chain family and Hermitian row", "[models]") {
  ParamGrid grid;
  grid.axes.push_back({"n", {4}});
  grid.axes.push_back({"gamma", {0.0, 0.5, 1.6}});
  grid.axes.push_back({"coupling", {1.0}});
  const SweepTable table = sweep_phase_diagram(ModelFamily::GainLossChain, grid);
  REQUIRE(table.rows.size() == 3);
  REQUIRE(table.rows[0].verdict == SweepVerdict::Unbroken);
  REQUIRE(table.rows[0].min_theta_eig == Approx(1.0).margin(1e-10));
  REQUIRE(table.rows[2].verdict == SweepVerdict::Broken);
}

TEST_CASE("sweep_phase_diagram: deterministic lexicographic order", "[models]") {
  ParamGrid grid;
  grid.axes.push_back({"a", {0.5, 0.1}});  // unsorted on purpose
  grid.axes.push_back({"b", {2.0, 1.0}});
  const SweepTable table = sweep_phase_diagram(ModelFamily::PT2Cell, grid);
  REQUIRE(table.rows.size() == 4);
  REQUIRE(table.rows[0].params == std::vector<double>{0.1, 1.0});
  REQUIRE(table.rows[1].params == std::vector<double>{0.1, 2.0});
  REQUIRE(table.rows[2].params == std::vector<double>{0.5, 1.0});
  REQUIRE(table.rows[3].params == std::vector<double>{0.5, 2.0});

  const SweepTable again = sweep_phase_diagram(ModelFamily::PT2Cell, grid);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    REQUIRE(table.rows[r].verdict == again.rows[r].verdict);
    REQUIRE(table.rows[r].max_im_e == again.rows[r].max_im_e);
  }
}

TEST_CASE("sweep_phase_diagram: grid validation", "[models]") {
  ParamGrid missing;
  missing.axes.push_back({"a", {0.1}});
  REQUIRE_THROWS_AS(sweep_phase_diagram(ModelFamily::PT2Cell, missing), InvalidGrid);
  ParamGrid empty;
  empty.axes.push_back({"a", {}});
  empty.axes.push_back({"b", {1.0}});
  REQUIRE_THROWS_AS(sweep_phase_diagram(ModelFamily::PT2Cell, empty), InvalidGrid);
}
