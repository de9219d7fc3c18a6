#pragma once

#include <span>

namespace gnls {

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Plain sample mean with the standard error of the mean.
MeanEstimate mean_estimate(std::span<const double> x);

struct WeightedEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  double ess = 0.0;
};

/// Self-normalized weighted mean. The standard error uses the delta method
/// sum w^2 (x - m)^2 / (sum w)^2, and ess is Kish's (sum w)^2 / sum w^2.
WeightedEstimate weighted_estimate(std::span<const double> x, std::span<const double> w);

double kish_ess(std::span<const double> w);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
  /// Degrees of freedom for the slope test; infinite for known-variance fits.
  double dof = 0.0;
};

/// Ordinary least squares y = intercept + slope * x. Requires >= 2 points
/// with distinct x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Weighted least squares with weights 1/sigma^2.
LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> sigma);

enum class Tail { less, greater };

/// One-sided p-value for the slope against zero (Student t with fit.dof
/// degrees of freedom).
double slope_pvalue(const LinearFit& fit, Tail tail);

/// Upper tail of the standard normal, P(Z > z).
double normal_sf(double z);

}  // namespace gnls
