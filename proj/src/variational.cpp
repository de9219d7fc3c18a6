#include "gnls/variational.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gnls {

BumpField build_bump(int N, const std::array<double, 2>& x0, const TorusGeometry& geometry) {
  if (N < 1) throw std::invalid_argument("build_bump: N must be >= 1");
  if (geometry.n_max() < 2 * N) throw std::invalid_argument("build_bump: box must hold |n| <= 2N");
  const int d = geometry.dim();
  const double amp = std::pow(double(N), -0.5 * d) * std::pow(kTwoPi, -0.5 * d);
  const double lo = double(N) * N, hi = 4.0 * N * N;
  SpectralField f(geometry);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Mode n = geometry.mode_at(i);
    const double q = norm_sq(n);
    if (q <= lo || q > hi) continue;
    f.at(i) = std::polar(amp, -(n[0] * x0[0] + n[1] * x0[1]));
  }
  return {std::move(f), N, x0};
}

BumpField build_bump(int N, double x0, int dim) {
  return build_bump(N, {x0, dim == 2 ? x0 : 0.0}, TorusGeometry::with_oversampling(dim, 2 * N));
}

namespace {

// Real-basis evaluation N^{-1/2} pi^{-1} sum_{N < n <= 2N} cos(n t), t = x - x0.
double bump_value_1d(int N, double t) {
  double acc = 0.0;
  for (int n = N + 1; n <= 2 * N; ++n) acc += std::cos(n * t);
  return acc / (std::sqrt(double(N)) * kPi);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return linear_fit(lx, ly).slope;
}

}  // namespace

BumpScan bump_norm_scan(const std::vector<int>& N_ladder, const std::vector<double>& s_list) {
  if (N_ladder.size() < 2) throw std::invalid_argument("bump_norm_scan: need >= 2 ladder points");
  for (std::size_t i = 1; i < N_ladder.size(); ++i)
    if (N_ladder[i] <= N_ladder[i - 1]) throw std::invalid_argument("bump_norm_scan: ladder must increase");
  BumpScan scan;
  scan.s_list = s_list;
  scan.rows.resize(N_ladder.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t r = 0; r < N_ladder.size(); ++r) {
    const int N = N_ladder[r];
    const BumpField b = build_bump(N);
    BumpRow row;
    row.N = N;
    row.l2_sq = std::norm(l2_norm(b.field));
    const GridField g = to_grid(b.field);
    for (const auto& v : g.values()) row.sup_norm = std::max(row.sup_norm, std::abs(v));
    row.center_min = std::numeric_limits<double>::infinity();
    for (int j = -20; j <= 20; ++j) {
      const double t = 0.1 / N * j / 20.0;
      row.center_min = std::min(row.center_min, bump_value_1d(N, t) / std::sqrt(double(N)));
    }
    for (double s : s_list) row.hs_norms.push_back(sobolev_norm(b.field, s));
    scan.rows[r] = std::move(row);
  }
  std::vector<double> ns, sups;
  for (const auto& row : scan.rows) {
    ns.push_back(row.N);
    sups.push_back(row.sup_norm);
  }
  scan.sup_slope = loglog_slope(ns, sups);
  for (std::size_t k = 0; k < s_list.size(); ++k) {
    std::vector<double> hs;
    for (const auto& row : scan.rows) hs.push_back(row.hs_norms[k]);
    scan.hs_slopes.push_back(loglog_slope(ns, hs));
  }
  return scan;
}

double VariationalConfig::step() const {
  if (dt_sde > 0) return dt_sde;
  const double fastest = std::pow(double(std::max(params.N, 1)), 0.5 * params.alpha);
  return std::min(1.0 / (10.0 * fastest), 1e-3);
}

int VariationalConfig::steps() const {
  return static_cast<int>(std::ceil(1.0 / step() - 1e-9));
}

void VariationalConfig::validate() const {
  params.validate();
  if (params.N < 1) throw std::invalid_argument("VariationalConfig: N must be >= 1");
  if (!(K > 0) || !(L > 0)) throw std::invalid_argument("VariationalConfig: K and L must be > 0");
  if (!(eta >= 0)) throw std::invalid_argument("VariationalConfig: eta must be >= 0");
  if (dt_sde < 0) throw std::invalid_argument("VariationalConfig: dt_sde must be >= 0");
  if (M == 0) throw std::invalid_argument("VariationalConfig: M must be > 0");
  const double dt = 1.0 / steps();
  const double slowest_margin = std::pow(std::sqrt(1.0 + double(params.N) * params.N), 0.5 * params.alpha) *
                                std::pow(double(params.N), -0.5 * params.alpha) / 10.0;
  if (dt > slowest_margin * (1 + 1e-12))
    throw std::invalid_argument("VariationalConfig: dt_sde violates the stability margin");
}

double ou_rate(const Mode& n, double alpha, int N) {
  return std::pow(bracket(n), -0.5 * alpha) * std::pow(double(N), 0.5 * alpha);
}

namespace {

struct ModeKernel {
  double a = 0.0;  // OU rate
  double c = 0.0;  // <n>^{-alpha/2}
  // Exact-scheme coefficients.
  double decay = 0.0, b_gain = 0.0, cov_scale = 0.0, resid = 0.0;
};

ModeKernel make_kernel(const Mode& n, double alpha, int N, double dt) {
  ModeKernel k;
  k.a = ou_rate(n, alpha, N);
  k.c = std::pow(bracket(n), -0.5 * alpha);
  const double x = k.a * dt;
  const double one_minus = -std::expm1(-x);
  k.decay = 1.0 - one_minus;
  k.b_gain = k.c * one_minus;
  // I = int_0^dt (1 - e^{-a(dt - r)}) dW(r): Cov(dB, I) and Var(I).
  const double cov = (x + std::expm1(-x)) / k.a;
  double var_i;
  if (x < 1e-2)
    var_i = dt * x * x * (1.0 / 3.0 - x / 4.0 + 7.0 * x * x / 60.0 - x * x * x / 40.0);
  else
    var_i = dt - 2.0 * one_minus / k.a - std::expm1(-2.0 * x) / (2.0 * k.a);
  k.cov_scale = cov / dt;
  k.resid = std::sqrt(std::max(var_i - cov * cov / dt, 0.0));
  return k;
}

// Advances (B, Z) by one step; g1, g2 are fresh complex normals.
inline void advance(const ModeKernel& k, double dt, SdeScheme scheme, Complex& B, Complex& Z,
                    RngStream& rng) {
  const Complex dB = std::sqrt(dt) * rng.complex_normal();
  if (scheme == SdeScheme::euler_maruyama) {
    Z += k.a * (k.c * B - Z) * dt;
  } else {
    const Complex I = k.cov_scale * dB + k.resid * rng.complex_normal();
    Z = k.decay * Z + k.b_gain * B + k.c * I;
  }
  B += dB;
}

std::vector<Mode> low_modes(int dim, int N) {
  const TorusGeometry g(dim, N, 2 * N + 1);
  std::vector<Mode> out;
  for (std::size_t i = 0; i < g.num_modes(); ++i)
    if (norm_sq(g.mode_at(i)) <= N * N) out.push_back(g.mode_at(i));
  return out;
}

}  // namespace

DriftPath DriftPath::zero(const VariationalConfig& config) {
  DriftPath p;
  p.modes = low_modes(config.params.dim, config.params.N);
  p.steps = config.steps();
  p.dt = 1.0 / p.steps;
  p.B.assign(p.modes.size(), std::vector<Complex>(p.steps + 1));
  p.Z = p.B;
  return p;
}

DriftPath simulate_drift(const VariationalConfig& config, RngStream& rng) {
  config.validate();
  DriftPath p = DriftPath::zero(config);
  for (std::size_t m = 0; m < p.modes.size(); ++m) {
    const ModeKernel k = make_kernel(p.modes[m], config.params.alpha, config.params.N, p.dt);
    Complex B = 0.0, Z = 0.0;
    for (int s = 1; s <= p.steps; ++s) {
      advance(k, p.dt, config.scheme, B, Z, rng);
      p.B[m][s] = B;
      p.Z[m][s] = Z;
    }
  }
  return p;
}

double ou_gap_closed_form(double alpha, int N, int dim) {
  double acc = 0.0;
  for (const Mode& n : low_modes(dim, N)) {
    const double a = ou_rate(n, alpha, N);
    acc += std::pow(bracket(n), -alpha) * (-std::expm1(-2.0 * a)) / (2.0 * a);
  }
  const double tail = sigma(alpha, kInfiniteCutoff, dim) - sigma(alpha, N, dim);
  return acc / std::pow(kTwoPi, dim) + tail;
}

MeanEstimate ou_gap_estimate(const VariationalConfig& config, std::uint64_t seed) {
  config.validate();
  const int dim = config.params.dim;
  const std::vector<Mode> modes = low_modes(dim, config.params.N);
  const int steps = config.steps();
  const double dt = 1.0 / steps;
  std::vector<ModeKernel> kernels;
  for (const Mode& n : modes) kernels.push_back(make_kernel(n, config.params.alpha, config.params.N, dt));
  const double tail = sigma(config.params.alpha, kInfiniteCutoff, dim) - sigma(config.params.alpha, config.params.N, dim);
  const double basis_sq = std::pow(kTwoPi, -dim);

  std::vector<double> values(config.M);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < config.M; ++i) {
    RngStream rng(seed, i);
    Complex gap = 0.0;
    for (const auto& k : kernels) {
      Complex B = 0.0, Z = 0.0;
      for (int s = 1; s <= steps; ++s) advance(k, dt, config.scheme, B, Z, rng);
      gap += k.c * B - Z;
    }
    values[i] = std::norm(gap) * basis_sq + tail;
  }
  return mean_estimate(values);
}

double drift_cost(const DriftPath& path, const VariationalConfig& config) {
  const double alpha = config.params.alpha;
  const BumpField bump = build_bump(config.params.N, 0.0, config.params.dim);
  const auto& bg = bump.field.geometry();
  double cost = 0.0;
  std::vector<char> covered(bump.field.size(), 0);
  for (std::size_t m = 0; m < path.modes.size(); ++m) {
    const Mode n = path.modes[m];
    const Complex f = bg.contains(n) ? bump.field[n] : Complex(0.0);
    if (bg.contains(n)) covered[bg.index_of(n)] = 1;
    const double w = std::pow(bracket(n), alpha);
    double acc = 0.0;
    for (int s = 0; s < path.steps; ++s) {
      const Complex theta = -(path.Z[m][s + 1] - path.Z[m][s]) / path.dt + config.eta * f;
      acc += std::norm(theta);
    }
    cost += w * acc * path.dt;
  }
  for (std::size_t i = 0; i < bump.field.size(); ++i) {
    if (covered[i] || bump.field.at(i) == 0.0) continue;
    cost += std::pow(bracket(bg.mode_at(i)), alpha) * config.eta * config.eta * std::norm(bump.field.at(i));
  }
  return 0.5 * cost;
}

ObjectiveReport objective_estimate(const VariationalConfig& config, std::uint64_t seed) {
  config.validate();
  const auto& prm = config.params;
  const int steps = config.steps();
  const double dt = 1.0 / steps;
  const TorusGeometry geom = TorusGeometry::with_oversampling(prm.dim, 2 * prm.N, prm.oversampling);
  const BumpField bump = build_bump(prm.N, {0.0, 0.0}, geom);
  const std::vector<Mode> modes = low_modes(prm.dim, prm.N);
  std::vector<ModeKernel> kernels;
  for (const Mode& n : modes) kernels.push_back(make_kernel(n, prm.alpha, prm.N, dt));
  const double bump_cost = 0.5 * config.eta * config.eta * std::norm(sobolev_norm(bump.field, 0.5 * prm.alpha));

  std::vector<double> values(config.M), costs(config.M), hits(config.M);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t i = 0; i < config.M; ++i) {
    RngStream rng(seed, i);
    SpectralField x = bump.field;
    x *= config.eta;
    double cost = 0.0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const auto& k = kernels[m];
      Complex B = 0.0, Z = 0.0;
      double acc = 0.0;
      for (int s = 1; s <= steps; ++s) {
        const Complex z_prev = Z;
        advance(k, dt, config.scheme, B, Z, rng);
        acc += std::norm((Z - z_prev) / dt);
      }
      cost += std::pow(bracket(modes[m]), prm.alpha) * acc * dt;
      x[modes[m]] += k.c * B - Z;
    }
    cost = 0.5 * cost + bump_cost;
    // Y(1) on N < |n| <= 2N: <n>^{-alpha/2} B_n(1), B_n(1) standard complex normal.
    const double lo = double(prm.N) * prm.N, hi = 4.0 * prm.N * prm.N;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const Mode n = geom.mode_at(j);
      const double q = norm_sq(n);
      if (q <= lo || q > hi) continue;
      x.at(j) += std::pow(bracket(n), -0.5 * prm.alpha) * rng.complex_normal();
    }
    const bool inside = l2_norm(x) <= config.K;
    const double v = inside ? std::min(potential(x, prm.beta), config.L) : 0.0;
    values[i] = prm.gamma * v + cost;
    costs[i] = cost;
    hits[i] = inside ? 1.0 : 0.0;
  }
  ObjectiveReport r;
  r.ensemble_size = config.M;
  const auto e = mean_estimate(values);
  r.estimate = e.mean;
  r.std_error = e.std_error;
  const auto c = mean_estimate(costs);
  r.mean_cost = c.mean;
  r.cost_std_error = c.std_error;
  r.indicator_frequency = mean_estimate(hits).mean;
  return r;
}

DivergenceScan divergence_scan(const ModelParams& params, double K, const std::vector<double>& L_ladder,
                               std::size_t M, std::uint64_t seed) {
  params.validate();
  if (!(K > 0)) throw std::invalid_argument("divergence_scan: K must be > 0");
  if (L_ladder.size() < 2) throw std::invalid_argument("divergence_scan: need >= 2 ladder points");
  if (M < 2) throw std::invalid_argument("divergence_scan: M must be >= 2");
  std::vector<double> V(M), inside(M);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < M; ++i) {
    RngStream rng(seed, i);
    const SpectralField u = sample_gaussian(params, rng);
    inside[i] = l2_norm(u) <= K ? 1.0 : 0.0;
    V[i] = inside[i] > 0 ? potential(project(u, params.N), params.beta) : 0.0;
  }
  auto column = [&](double L) {
    std::vector<double> col(M);
    for (std::size_t i = 0; i < M; ++i)
      col[i] = inside[i] > 0 ? std::exp(-params.gamma * std::min(V[i], L)) : 0.0;
    return col;
  };

  DivergenceScan scan;
  for (double L : L_ladder) {
    const auto e = mean_estimate(column(L));
    scan.rows.push_back({L, e.mean, e.std_error});
  }
  scan.strictly_increasing = true;
  for (std::size_t k = 1; k < scan.rows.size(); ++k)
    if (!(scan.rows[k].estimate > scan.rows[k - 1].estimate)) scan.strictly_increasing = false;

  // Paired comparison of the last and first ladder points on common draws.
  const auto first = column(L_ladder.front());
  const auto last = column(L_ladder.back());
  std::vector<double> diff(M);
  for (std::size_t i = 0; i < M; ++i) diff[i] = last[i] - first[i];
  const auto d = mean_estimate(diff);
  if (d.std_error > 0)
    scan.trend_pvalue = normal_sf(d.mean / d.std_error);
  else
    scan.trend_pvalue = d.mean > 0 ? 0.0 : 1.0;

  const auto& a = scan.rows[scan.rows.size() - 2];
  const auto& b = scan.rows.back();
  scan.saturated = std::abs(b.estimate - a.estimate) <= std::max(a.std_error, b.std_error);
  return scan;
}

}  // namespace gnls
