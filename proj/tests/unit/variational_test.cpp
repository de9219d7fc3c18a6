#include <gtest/gtest.h>

#include <cmath>

#include "gnls/variational.hpp"

using namespace gnls;

TEST(Bump, MassIdentityAndReality) {
  for (int N : {1, 5, 16, 40}) {
    const BumpField b = build_bump(N);
    EXPECT_NEAR(std::norm(l2_norm(b.field)), 1.0 / kPi, 1e-13);
    const GridField g = to_grid(b.field);
    double max_imag = 0.0;
    for (const auto& v : g.values()) max_imag = std::max(max_imag, std::abs(v.imag()));
    EXPECT_LT(max_imag, 1e-13);
    // Peak sqrt(N)/pi at the centre.
    EXPECT_NEAR(g.values()[0].real(), std::sqrt(double(N)) / kPi, 1e-12);
  }
}

TEST(Bump, SupportOnAnnulus) {
  const BumpField b = build_bump(6);
  for (int n = -12; n <= 12; ++n) {
    const bool on = std::abs(n) > 6;
    EXPECT_EQ((b.field[{n, 0}]) != Complex(0.0), on) << n;
  }
}

TEST(Bump, CentreIsTranslation) {
  const int N = 7;
  const double x0 = 1.3;
  const BumpField shifted = build_bump(N, x0);
  const SpectralField moved = translate(build_bump(N).field, {x0, 0.0});
  for (std::size_t i = 0; i < moved.size(); ++i) EXPECT_NEAR(std::abs(moved.at(i) - shifted.field.at(i)), 0.0, 1e-15);
}

TEST(Bump, TwoDimensional) {
  const BumpField b = build_bump(3, 0.0, 2);
  EXPECT_EQ(b.field.geometry().dim(), 2);
  EXPECT_EQ((b.field[{2, 2}]), Complex(0.0));
  EXPECT_NE((b.field[{3, 2}]), Complex(0.0));
  EXPECT_THROW(build_bump(4, {0.0, 0.0}, TorusGeometry(1, 7, 15)), std::invalid_argument);
  EXPECT_THROW(build_bump(0), std::invalid_argument);
}

TEST(Bump, NormScan) {
  const BumpScan scan = bump_norm_scan({8, 16, 32, 64}, {0.0, 1.0});
  ASSERT_EQ(scan.rows.size(), 4u);
  EXPECT_NEAR(scan.sup_slope, 0.5, 0.01);
  EXPECT_NEAR(scan.hs_slopes[0], 0.0, 1e-10);
  EXPECT_NEAR(scan.hs_slopes[1], 1.0, 0.05);
  for (const auto& row : scan.rows) {
    EXPECT_GT(row.center_min, 0.0);
    EXPECT_NEAR(row.hs_norms[0] * row.hs_norms[0], 1.0 / kPi, 1e-12);
  }
  EXPECT_THROW(bump_norm_scan({8}, {0.0}), std::invalid_argument);
  EXPECT_THROW(bump_norm_scan({8, 4}, {0.0}), std::invalid_argument);
}

TEST(Ou, RatesAndStepRule) {
  EXPECT_DOUBLE_EQ(ou_rate({0, 0}, 2.0, 16), 16.0);
  EXPECT_NEAR(ou_rate({16, 0}, 2.0, 16), 16.0 / std::sqrt(257.0), 1e-14);
  VariationalConfig v;
  v.params.N = 64;
  v.params.alpha = 2.5;
  EXPECT_NEAR(v.step(), 1.0 / (10.0 * std::pow(64.0, 1.25)), 1e-15);
  EXPECT_EQ(v.steps(), 1811);
  v.params.alpha = 2.0;
  EXPECT_DOUBLE_EQ(v.step(), 1e-3);
  v.dt_sde = 0.5;
  EXPECT_THROW(v.validate(), std::invalid_argument);
}

TEST(Ou, ClosedFormLimits) {
  // Mode n = 0 with rate a: (1 - e^{-2a}) / (2a) / (2pi) plus the rest.
  const double cf = ou_gap_closed_form(2.0, 1);
  double expected = 0.0;
  for (int n = -1; n <= 1; ++n) {
    const double w = 1.0 / (1.0 + n * n);
    const double a = std::pow(w, 0.5);
    expected += w * (1.0 - std::exp(-2.0 * a)) / (2.0 * a);
  }
  expected = expected / kTwoPi + sigma(2.0, kInfiniteCutoff, 1) - sigma(2.0, 1, 1);
  EXPECT_NEAR(cf, expected, 1e-12);
  EXPECT_GT(ou_gap_closed_form(2.0, 16), 0.0);
  EXPECT_LT(ou_gap_closed_form(3.0, 64), ou_gap_closed_form(3.0, 4));
}

TEST(Ou, ExactSchemeMatchesClosedForm) {
  VariationalConfig v;
  v.params.N = 4;
  v.params.alpha = 2.5;
  v.M = 3000;
  v.scheme = SdeScheme::exact;
  v.dt_sde = 1e-2;
  const MeanEstimate e = ou_gap_estimate(v, 17);
  EXPECT_NEAR(e.mean, ou_gap_closed_form(2.5, 4), 3.5 * e.std_error);
}

TEST(Ou, BrownianIncrementsHaveUnitVariance) {
  VariationalConfig v;
  v.params.N = 2;
  v.dt_sde = 1e-2;
  double acc = 0.0;
  const int M = 2000;
  for (int i = 0; i < M; ++i) {
    RngStream rng(19, i);
    const DriftPath p = simulate_drift(v, rng);
    EXPECT_EQ(p.B[0][0], Complex(0.0));
    acc += std::norm(p.B[0][p.steps]);
  }
  EXPECT_NEAR(acc / M, 1.0, 0.1);
}

TEST(Ou, Deterministic) {
  VariationalConfig v;
  v.params.N = 3;
  v.dt_sde = 1e-2;
  RngStream a(1, 2), b(1, 2);
  const DriftPath p = simulate_drift(v, a), q = simulate_drift(v, b);
  EXPECT_EQ(p.modes.size(), 7u);
  for (std::size_t m = 0; m < p.modes.size(); ++m) EXPECT_EQ(p.Z[m], q.Z[m]);
}

TEST(DriftCost, ZeroPathIsBumpEnergy) {
  VariationalConfig v;
  v.params.N = 5;
  v.params.alpha = 2.0;
  v.eta = 1.7;
  v.dt_sde = 1e-2;
  const DriftPath zero = DriftPath::zero(v);
  const double expected = 0.5 * v.eta * v.eta * std::norm(sobolev_norm(build_bump(5).field, 1.0));
  EXPECT_NEAR(drift_cost(zero, v), expected, 1e-12 * expected);

  // Constant-velocity Z on one mode: cost 1/2 <n>^alpha |v|^2.
  DriftPath p = zero;
  const Complex vel(0.4, -0.3);
  for (int s = 0; s <= p.steps; ++s) p.Z[0][s] = vel * (s * p.dt);
  v.eta = 0.0;
  const double w = std::pow(bracket(p.modes[0]), 2.0);
  EXPECT_NEAR(drift_cost(p, v), 0.5 * w * std::norm(vel), 1e-12);
}

TEST(Objective, FocusingDecreasesWithN) {
  double prev = std::numeric_limits<double>::infinity();
  for (int N : {16, 24, 32}) {
    VariationalConfig v;
    v.params.alpha = 2.0;
    v.params.N = N;
    v.params.beta = 2.0;
    v.params.gamma = -1.0;
    v.K = 3.0;
    v.eta = 1.5;
    v.L = 1e12;
    v.M = 200;
    const ObjectiveReport r = objective_estimate(v, 20261016);
    EXPECT_LT(r.estimate, prev) << "N=" << N;
    EXPECT_GT(r.indicator_frequency, 0.9);
    EXPECT_GT(r.mean_cost, 0.0);
    prev = r.estimate;
  }
}

TEST(Objective, DefocusingCostOnly) {
  VariationalConfig v;
  v.params.N = 4;
  v.params.gamma = 1.0;
  v.K = 1e-6;
  v.eta = 0.0;
  v.M = 50;
  const ObjectiveReport r = objective_estimate(v, 3);
  EXPECT_EQ(r.indicator_frequency, 0.0);
  EXPECT_NEAR(r.estimate, r.mean_cost, 1e-12);
}

TEST(Divergence, DefocusingSaturatesAndFocusingGrows) {
  ModelParams p;
  p.N = 8;
  p.beta = 0.5;
  p.gamma = 1.0;
  const DivergenceScan d = divergence_scan(p, 2.0, {1e1, 1e2, 1e3}, 5000, 9);
  EXPECT_TRUE(d.saturated);
  for (std::size_t k = 1; k < d.rows.size(); ++k) EXPECT_LE(d.rows[k].estimate, d.rows[k - 1].estimate);

  p.gamma = -1.0;
  p.beta = 4.0;
  const DivergenceScan f = divergence_scan(p, 3.0, {1e1, 1e2, 1e3}, 5000, 9);
  for (std::size_t k = 1; k < f.rows.size(); ++k) EXPECT_GE(f.rows[k].estimate, f.rows[k - 1].estimate);
  EXPECT_THROW(divergence_scan(p, 1.0, {1e1}, 10, 1), std::invalid_argument);
  EXPECT_THROW(divergence_scan(p, 0.0, {1e1, 1e2}, 10, 1), std::invalid_argument);
}
