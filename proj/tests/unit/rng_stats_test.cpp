#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gnls/rng.hpp"
#include "gnls/stats.hpp"

using namespace gnls;

TEST(Rng, Deterministic) {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  RngStream c(42, 7), d(42, 7);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(c.complex_normal(), d.complex_normal());
}

TEST(Rng, StreamsDiffer) {
  RngStream a(42, 0), b(42, 1), c(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    same_ab += x == b.next_u64();
    same_ac += x == c.next_u64();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(Rng, NeighbouringStreamsUncorrelated) {
  const int n = 200000;
  double sxy = 0.0;
  RngStream a(5, 10), b(5, 11);
  for (int i = 0; i < n; ++i) sxy += a.normal() * b.normal();
  EXPECT_LT(std::abs(sxy / n), 5.0 / std::sqrt(double(n)));
}

TEST(Rng, UniformOpenInterval) {
  RngStream r(1, 1);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Rng, ComplexNormalMoments) {
  RngStream r(3, 0);
  const int n = 200000;
  double m2 = 0.0, m4 = 0.0;
  std::complex<double> mean = 0.0, pseudo = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto g = r.complex_normal();
    mean += g;
    pseudo += g * g;
    m2 += std::norm(g);
    m4 += std::norm(g) * std::norm(g);
  }
  EXPECT_NEAR(m2 / n, 1.0, 0.01);
  EXPECT_NEAR(m4 / n, 2.0, 0.05);  // |g|^2 is Exp(1)
  EXPECT_LT(std::abs(mean / double(n)), 0.01);
  EXPECT_LT(std::abs(pseudo / double(n)), 0.01);
}

TEST(Stats, MeanEstimate) {
  const std::vector<double> x{1, 2, 3, 4};
  const MeanEstimate m = mean_estimate(x);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(m.count, 4u);
}

TEST(Stats, WeightedEstimateUniformWeights) {
  const std::vector<double> x{1, 2, 3, 4}, w(4, 0.3);
  const WeightedEstimate e = weighted_estimate(x, w);
  EXPECT_NEAR(e.estimate, 2.5, 1e-15);
  EXPECT_NEAR(e.ess, 4.0, 1e-12);
  EXPECT_GE(e.std_error, 0.0);
}

TEST(Stats, KishEss) {
  const std::vector<double> w{1, 0, 0, 0};
  EXPECT_DOUBLE_EQ(kish_ess(w), 1.0);
  const std::vector<double> v{1, 1, 2};
  EXPECT_DOUBLE_EQ(kish_ess(v), 16.0 / 6.0);
}

TEST(Stats, LinearFitExact) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const LinearFit f = linear_fit(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
  EXPECT_EQ(f.dof, 2.0);
  EXPECT_THROW(linear_fit(std::vector<double>{1, 1}, std::vector<double>{0, 1}), std::invalid_argument);
}

TEST(Stats, SlopePvalue) {
  const std::vector<double> x{0, 1, 2, 3, 4}, y{0.1, 1.0, 2.1, 2.9, 4.0};
  const LinearFit f = linear_fit(x, y);
  EXPECT_LT(slope_pvalue(f, Tail::greater), 1e-3);
  EXPECT_GT(slope_pvalue(f, Tail::less), 0.999);

  const std::vector<double> s(5, 1.0);
  const LinearFit k = weighted_linear_fit(x, y, s);
  EXPECT_TRUE(std::isinf(k.dof));
  EXPECT_NEAR(k.slope_stderr, 1.0 / std::sqrt(10.0), 1e-12);
}

TEST(Stats, NormalTail) {
  EXPECT_DOUBLE_EQ(normal_sf(0.0), 0.5);
  EXPECT_NEAR(normal_sf(1.959963984540054), 0.025, 1e-12);
  EXPECT_NEAR(normal_sf(-3.0), 1.0 - normal_sf(3.0), 1e-15);
}
