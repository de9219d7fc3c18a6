#include <gtest/gtest.h>

#include <sstream>

#include "gnls/dynamics.hpp"

using namespace gnls;

namespace {

FlowConfig base(int N = 8) {
  FlowConfig c;
  c.params.alpha = 2.0;
  c.params.N = N;
  c.params.beta = 0.5;
  c.params.gamma = 1.0;
  c.dt = 1e-2;
  c.t_final = 0.1;
  return c;
}

SpectralField draw(const ModelParams& p, std::uint64_t stream) {
  RngStream rng(2024, stream);
  return sample_gaussian(p, rng);
}

double max_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.at(i) - b.at(i)));
  return m;
}

SpectralField constant(const TorusGeometry& g, Complex value) {
  SpectralField u(g);
  u[{0, 0}] = value * std::sqrt(kTwoPi);
  return u;
}

}  // namespace

TEST(Linear, PreservesModuliAndNorms) {
  const FlowConfig c = base();
  const SpectralField u = draw(c.params, 0);
  const SpectralField v = linear_substep(u, 0.37, c);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(std::abs(v.at(i)), std::abs(u.at(i)), 1e-15);
  EXPECT_NEAR(sobolev_norm(v, 1.5), sobolev_norm(u, 1.5), 1e-12);
}

TEST(Linear, PureSymbolPeriodAndZeroMode) {
  FlowConfig c = base();
  c.symbol = DispersionSymbol::pure;
  const SpectralField u = draw(c.params, 1);
  EXPECT_LT(max_diff(linear_substep(u, kTwoPi, c), u), 1e-12);
  EXPECT_EQ((linear_substep(u, 0.3, c)[{0, 0}]), (u[{0, 0}]));
  EXPECT_DOUBLE_EQ(dispersion({3, 0}, 2.0, DispersionSymbol::pure), 9.0);
  EXPECT_DOUBLE_EQ(dispersion({3, 0}, 2.0, DispersionSymbol::bracket), 10.0);
}

TEST(Linear, PhaseConvention) {
  const FlowConfig c = base();
  SpectralField u(c.params.geometry());
  u[{2, 0}] = 1.0;
  EXPECT_NEAR(std::abs((linear_substep(u, 0.1, c)[{2, 0}]) - std::polar(1.0, -0.5)), 0.0, 1e-15);
}

TEST(Collocation, ConstantFieldClosedForm) {
  ModelParams p;
  p.beta = 1.0;
  p.gamma = 1.0;
  const auto g = p.geometry();
  const double t = 0.3;
  const SpectralField v = nonlinear_substep_collocation(constant(g, 1.0), t, p);
  const GridField w = to_grid(v);
  const Complex expected = std::polar(1.0, -2.0 * std::exp(1.0) * t);
  for (const auto& x : w.values()) EXPECT_NEAR(std::abs(x - expected), 0.0, 1e-13);
}

TEST(Collocation, PointwiseModulusAndGammaZero) {
  ModelParams p;
  p.N = 6;
  // Grid of exactly 2 n_max + 1 points keeps the round trip exact.
  p.oversampling = 1.0;
  const SpectralField u = draw(p, 2);
  const GridField a = to_grid(u), b = to_grid(nonlinear_substep_collocation(u, 0.2, p));
  for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(std::abs(b.values()[j]), std::abs(a.values()[j]), 1e-12);
  EXPECT_NEAR(mass(nonlinear_substep_collocation(u, 0.2, p)), mass(u), 1e-12 * mass(u));
  p.gamma = 0.0;
  EXPECT_EQ(max_diff(nonlinear_substep_collocation(u, 0.2, p), u), 0.0);
}

TEST(Galerkin, MatchesCollocationOnConstants) {
  ModelParams p;
  p.N = 4;
  p.beta = 0.8;
  const auto g = p.geometry();
  const SpectralField u = constant(g, Complex(0.6, 0.3));
  const SpectralField a = nonlinear_substep_galerkin(u, 1e-2, p, 16);
  const SpectralField b = nonlinear_substep_collocation(u, 1e-2, p);
  EXPECT_LT(max_diff(a, b), 1e-10);
}

TEST(Galerkin, HighModesUntouched) {
  FlowConfig c = base(8);
  const SpectralField v = draw(c.params, 3);
  c.params.N = 3;
  const SpectralField w = nonlinear_substep_galerkin(v, 0.1, c.params, 2);
  for (int n = 4; n <= 8; ++n) {
    EXPECT_EQ((w[{n, 0}]), (v[{n, 0}]));
    EXPECT_EQ((w[{-n, 0}]), (v[{-n, 0}]));
  }
  // Over a macro step the high modes only feel the linear flow.
  const SpectralField s = flow_step(v, c.dt, c, FlowMode::galerkin);
  const SpectralField lin = linear_substep(v, c.dt, c);
  for (int n = 4; n <= 8; ++n) EXPECT_LT(std::abs(s[{n, 0}] - lin[{n, 0}]), 1e-15);
}

TEST(Galerkin, FourthOrderInSubsteps) {
  ModelParams p;
  p.N = 2;
  p.beta = 1.0;
  const auto g = p.geometry();
  const SpectralField u = constant(g, 0.9);
  const SpectralField exact = nonlinear_substep_collocation(u, 0.5, p);
  std::vector<double> err;
  for (int s : {8, 16, 32}) err.push_back(max_diff(nonlinear_substep_galerkin(u, 0.5, p, s), exact));
  EXPECT_NEAR(err[0] / err[1], 16.0, 3.0);
  EXPECT_NEAR(err[1] / err[2], 16.0, 3.0);
  EXPECT_THROW(nonlinear_substep_galerkin(u, 1.0, p, 0), std::invalid_argument);
}

TEST(Galerkin, SubstepConservesMassAndPotential) {
  ModelParams p;
  p.N = 6;
  const SpectralField u = draw(p, 4);
  const SpectralField v = nonlinear_substep_galerkin(u, 0.05, p, 4);
  EXPECT_NEAR(mass(v), mass(u), 1e-9 * mass(u));
  EXPECT_NEAR(potential(project(v, p.N), p.beta), potential(project(u, p.N), p.beta), 1e-8 * potential(u, p.beta));
}

TEST(Evolve, RecordsAndConserves) {
  FlowConfig c = base();
  c.t_final = 0.5;
  c.record_every = 10;
  const Trajectory tr = evolve(draw(c.params, 5), c, FlowMode::galerkin);
  ASSERT_EQ(tr.size(), 6u);
  for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_GT(tr.times[i], tr.times[i - 1]);
  EXPECT_DOUBLE_EQ(tr.times.back(), 0.5);
  EXPECT_LT(tr.relative_mass_drift(), 1e-10);
  EXPECT_LT(tr.relative_hamiltonian_drift(), 1e-3);
  std::ostringstream csv;
  tr.write_csv(csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "t,mass,hamiltonian,potential,h_s_norm");
}

TEST(Evolve, StrangIsSecondOrderInEnergy) {
  FlowConfig c = base();
  c.t_final = 1.0;
  c.keep_snapshots = false;
  const SpectralField u = draw(c.params, 6);
  std::vector<double> drift;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    c.dt = dt;
    drift.push_back(evolve(u, c, FlowMode::galerkin).relative_hamiltonian_drift());
  }
  EXPECT_NEAR(std::log2(drift[0] / drift[1]), 2.0, 0.25);
  EXPECT_NEAR(std::log2(drift[1] / drift[2]), 2.0, 0.25);
}

TEST(Evolve, Deterministic) {
  const FlowConfig c = base();
  const SpectralField u = draw(c.params, 7);
  EXPECT_EQ(max_diff(evolve_to(u, 0.1, c, FlowMode::galerkin), evolve_to(u, 0.1, c, FlowMode::galerkin)), 0.0);
}

TEST(Evolve, Reversible) {
  FlowConfig c = base();
  c.dt = 1e-3;
  c.nonlinear_substeps = 2;
  const SpectralField u = draw(c.params, 8);
  const SpectralField fwd = evolve_to(u, 0.05, c, FlowMode::galerkin);
  EXPECT_GT(max_diff(fwd, u), 1e-3);
  EXPECT_LT(max_diff(evolve_to(fwd, -0.05, c, FlowMode::galerkin), u), 1e-10);
}

TEST(Evolve, LieSchemeIsFirstOrder) {
  FlowConfig c = base();
  c.scheme = SplittingScheme::lie;
  c.t_final = 1.0;
  c.keep_snapshots = false;
  const SpectralField u = draw(c.params, 9);
  std::vector<double> drift;
  for (double dt : {1e-2, 5e-3}) {
    c.dt = dt;
    drift.push_back(evolve(u, c, FlowMode::galerkin).relative_hamiltonian_drift());
  }
  EXPECT_NEAR(std::log2(drift[0] / drift[1]), 1.0, 0.3);
}

TEST(Evolve, Validation) {
  FlowConfig c = base();
  const SpectralField u = draw(c.params, 10);
  c.t_final = 0.015;
  EXPECT_THROW(evolve(u, c, FlowMode::galerkin), std::invalid_argument);
  c = base();
  c.dt = 0;
  EXPECT_THROW(evolve(u, c, FlowMode::galerkin), std::invalid_argument);
  c = base();
  c.nonlinear_substeps = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Liouville, VolumePreserving) {
  FlowConfig c = base(2);
  c.dt = 1e-3;
  for (int i = 0; i < 3; ++i) {
    const LiouvilleResult r = liouville_check(c, draw(c.params, 20 + i));
    EXPECT_EQ(r.dimension, 10);
    EXPECT_LT(r.deviation, 1e-6);
  }
  c.params.gamma = 0.0;
  EXPECT_LT(liouville_check(c, draw(c.params, 30)).deviation, 1e-9);
  c.params.N = 8;
  EXPECT_THROW(liouville_check(c, draw(c.params, 31)), std::invalid_argument);
}

TEST(Truncation, ErrorsDecrease) {
  FlowConfig c = base();
  c.dt = 1e-2;
  c.t_final = 0.2;
  SpectralField u(TorusGeometry::with_oversampling(1, 16));
  for (int n = -4; n <= 4; ++n) u[{n, 0}] = std::exp(-0.7 * std::abs(n));
  const TruncationTable t = truncation_convergence(u, c, {2, 4, 8}, 16, 0.5);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_TRUE(t.monotone);
  EXPECT_LT(t.decay_order, 0.0);
  EXPECT_THROW(truncation_convergence(u, c, {2, 32}, 16, 0.5), std::invalid_argument);
  EXPECT_THROW(truncation_convergence(u, c, {2}, 32, 0.5), std::invalid_argument);
}
