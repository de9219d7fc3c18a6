#include "gnls/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gnls {

MeanEstimate mean_estimate(std::span<const double> x) {
  MeanEstimate out;
  out.count = x.size();
  if (x.empty()) return out;
  double sum = 0.0;
  for (double v : x) sum += v;
  out.mean = sum / x.size();
  if (x.size() < 2) return out;
  double ss = 0.0;
  for (double v : x) ss += (v - out.mean) * (v - out.mean);
  out.std_error = std::sqrt(ss / (x.size() - 1) / x.size());
  return out;
}

double kish_ess(std::span<const double> w) {
  double s = 0.0, s2 = 0.0;
  for (double v : w) {
    s += v;
    s2 += v * v;
  }
  return s2 > 0 ? s * s / s2 : 0.0;
}

WeightedEstimate weighted_estimate(std::span<const double> x, std::span<const double> w) {
  if (x.size() != w.size()) throw std::invalid_argument("weighted_estimate: size mismatch");
  WeightedEstimate out;
  double sw = 0.0, swx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (w[i] < 0) throw std::invalid_argument("weighted_estimate: negative weight");
    sw += w[i];
    swx += w[i] * x[i];
  }
  if (!(sw > 0)) throw std::domain_error("weighted_estimate: total weight is zero");
  out.estimate = swx / sw;
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - out.estimate;
    acc += w[i] * w[i] * d * d;
  }
  out.std_error = std::sqrt(acc) / sw;
  out.ess = kish_ess(w);
  return out;
}

namespace {

LinearFit fit_impl(std::span<const double> x, std::span<const double> y,
                   const std::vector<double>& wts, bool known_sigma) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("linear_fit: need >= 2 paired points");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += wts[i];
    sx += wts[i] * x[i];
    sy += wts[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += wts[i] * (x[i] - mx) * (x[i] - mx);
    sxy += wts[i] * (x[i] - mx) * (y[i] - my);
    syy += wts[i] * (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0)) throw std::invalid_argument("linear_fit: x values are all equal");
  LinearFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += wts[i] * r * r;
  }
  f.r_squared = syy > 0 ? 1.0 - rss / syy : 1.0;
  f.dof = known_sigma ? std::numeric_limits<double>::infinity() : double(n) - 2.0;
  if (known_sigma)
    f.slope_stderr = std::sqrt(1.0 / sxx);
  else
    f.slope_stderr = n > 2 ? std::sqrt(rss / (n - 2) / sxx) : std::numeric_limits<double>::infinity();
  return f;
}

}  // namespace

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  return fit_impl(x, y, std::vector<double>(x.size(), 1.0), false);
}

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> sigma) {
  if (sigma.size() != x.size()) throw std::invalid_argument("weighted_linear_fit: size mismatch");
  std::vector<double> w(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(sigma[i] > 0)) throw std::invalid_argument("weighted_linear_fit: sigma must be > 0");
    w[i] = 1.0 / (sigma[i] * sigma[i]);
  }
  return fit_impl(x, y, w, true);
}

double normal_sf(double z) {
  return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<>(), z));
}

double slope_pvalue(const LinearFit& fit, Tail tail) {
  if (!(fit.slope_stderr > 0)) {
    if (fit.slope == 0) return 1.0;
    const bool right = (tail == Tail::greater) == (fit.slope > 0);
    return right ? 0.0 : 1.0;
  }
  if (std::isinf(fit.slope_stderr)) return 1.0;
  const double t = fit.slope / fit.slope_stderr;
  const double signed_t = tail == Tail::greater ? t : -t;
  if (std::isfinite(fit.dof) && fit.dof >= 1) {
    const boost::math::students_t_distribution<> dist(fit.dof);
    return boost::math::cdf(boost::math::complement(dist, signed_t));
  }
  return normal_sf(signed_t);
}

}  // namespace gnls
