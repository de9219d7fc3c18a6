#include "gnls/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gnls {

CoeffSequence::CoeffSequence(int n_max) : n_max_(n_max), c_(2 * std::max(n_max, 0) + 1) {
  if (n_max < 0) throw std::invalid_argument("CoeffSequence: n_max must be >= 0");
}

CoeffSequence::CoeffSequence(int n_max, std::vector<Complex> coeffs)
    : n_max_(n_max), c_(std::move(coeffs)) {
  if (n_max < 0 || c_.size() != static_cast<std::size_t>(2 * n_max + 1))
    throw std::invalid_argument("CoeffSequence: need 2 n_max + 1 coefficients");
}

CoeffSequence CoeffSequence::from_field(const SpectralField& u) {
  if (u.geometry().dim() != 1) throw std::invalid_argument("CoeffSequence: d must be 1");
  CoeffSequence c(u.geometry().n_max());
  const double s = 1.0 / std::sqrt(kTwoPi);
  for (int n = -c.n_max(); n <= c.n_max(); ++n) c.at(n) = u[{n, 0}] * s;
  return c;
}

SpectralField CoeffSequence::to_field(const TorusGeometry& geometry) const {
  if (geometry.dim() != 1) throw std::invalid_argument("CoeffSequence: d must be 1");
  SpectralField u(geometry);
  const double s = std::sqrt(kTwoPi);
  for (int n = -n_max_; n <= n_max_; ++n) {
    const Complex c = (*this)(n);
    if (std::abs(n) > geometry.n_max()) {
      if (c != 0.0) throw std::invalid_argument("CoeffSequence: mode outside the target box");
      continue;
    }
    u[{n, 0}] = c * s;
  }
  return u;
}

Complex CoeffSequence::operator()(int n) const {
  if (std::abs(n) > n_max_) return 0.0;
  return c_[static_cast<std::size_t>(n + n_max_)];
}

double CoeffSequence::max_abs() const {
  double m = 0.0;
  for (const auto& c : c_) m = std::max(m, std::abs(c));
  return m;
}

Complex mean_functional(const GridField& f) {
  if (f.geometry().dim() != 1) throw std::invalid_argument("mean_functional: d must be 1");
  Complex acc = 0.0;
  for (const auto& v : f.values()) acc += v;
  return acc / static_cast<double>(f.size());
}

Complex mean_functional(const CoeffSequence& f) { return f(0); }

double gauge_value(const SpectralField& u, const ModelParams& params) {
  if (u.geometry().dim() != 1) throw std::invalid_argument("gauge_value: d must be 1");
  const GridField g = to_grid(u);
  double acc = 0.0;
  for (const auto& v : g.values()) {
    const double q = params.beta * std::norm(v);
    acc += (1.0 + q) * std::exp(q);
  }
  return 2.0 * params.gamma * params.beta * acc / static_cast<double>(g.size());
}

double gauge_value_series(const SpectralField& u, const ModelParams& params, int terms) {
  if (u.geometry().dim() != 1) throw std::invalid_argument("gauge_value_series: d must be 1");
  const GridField g = to_grid(u);
  double total = 0.0;
  for (const auto& v : g.values()) {
    const double q = params.beta * std::norm(v);
    double power = 1.0;  // q^k / k!
    double s = 0.0;
    for (int k = 0; k < terms; ++k) {
      s += (k + 1) * power;
      power *= q / (k + 1);
    }
    total += s;
  }
  return 2.0 * params.gamma * params.beta * total / static_cast<double>(g.size());
}

std::vector<double> cumulative_simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  if (n == 2) {
    out[1] = 0.5 * h * (f[0] + f[1]);
    return out;
  }
  std::vector<double> even(n, 0.0);  // Simpson on [0, t_j] for even j
  for (std::size_t j = 2; j < n; j += 2)
    even[j] = even[j - 2] + h / 3.0 * (f[j - 2] + 4.0 * f[j - 1] + f[j]);
  for (std::size_t j = 1; j < n; ++j) {
    if (j % 2 == 0) {
      out[j] = even[j];
    } else if (j == 1) {
      out[j] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
    } else {
      out[j] = even[j - 3] + 3.0 * h / 8.0 * (f[j - 3] + 3.0 * f[j - 2] + 3.0 * f[j - 1] + f[j]);
    }
  }
  return out;
}

Trajectory apply_gauge(const Trajectory& traj, const ModelParams& params, GaugeDirection direction) {
  if (traj.snapshots.size() != traj.times.size())
    throw std::invalid_argument("apply_gauge: trajectory has no stored snapshots");
  const std::size_t n = traj.size();
  if (n == 0) return traj;
  double h = 0.0;
  if (n > 1) {
    h = traj.times[1] - traj.times[0];
    for (std::size_t j = 1; j < n; ++j)
      if (std::abs(traj.times[j] - traj.times[j - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
        throw std::invalid_argument("apply_gauge: snapshot spacing must be uniform");
  }
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j) g[j] = gauge_value(traj.snapshots[j], params);
  const std::vector<double> phase = cumulative_simpson(g, h);
  const double sign = direction == GaugeDirection::forward ? 1.0 : -1.0;
  Trajectory out = traj;
  for (std::size_t j = 1; j < n; ++j) out.snapshots[j] *= std::polar(1.0, sign * phase[j]);
  return out;
}

int MultilinearSpec::sign(int j) const {
  const int s = j % 2 == 0 ? -1 : 1;
  return flipped ? -s : s;
}

namespace {

enum class Region { non_resonant, resonant };

CoeffSequence multilinear(const MultilinearSpec& spec, std::span<const CoeffSequence> inputs,
                          double budget, Region region) {
  if (spec.k < 1) throw std::invalid_argument("multilinear: k must be >= 1");
  const int arity = spec.arity();
  if (static_cast<int>(inputs.size()) != arity)
    throw std::invalid_argument("multilinear: expected 2k+1 inputs");

  std::vector<std::vector<int>> support(arity);
  double tuples = 1.0;
  int out_max = 0;
  for (int j = 0; j < arity; ++j) {
    const auto& c = inputs[j];
    for (int n = -c.n_max(); n <= c.n_max(); ++n)
      if (c(n) != 0.0) support[j].push_back(n);
    tuples *= static_cast<double>(support[j].size());
    out_max += c.n_max();
  }
  if (tuples > budget) throw std::length_error("multilinear: enumeration budget exceeded");
  CoeffSequence out(out_max);
  if (tuples == 0) return out;

  // Input j is position j + 1 of the frequency tuple.
  std::vector<std::size_t> pos(arity, 0);
  while (true) {
    int n0 = 0;
    Complex prod = 1.0;
    for (int j = 0; j < arity; ++j) {
      const int n = support[j][pos[j]];
      const int s = spec.sign(j + 1);
      n0 += (spec.flipped ? -s : s) * n;
      const Complex c = inputs[j](n);
      prod *= s > 0 ? c : std::conj(c);
    }
    int hits = 0;
    for (int j = 0; j < arity; j += 2)
      if (support[j][pos[j]] == n0) ++hits;
    if (region == Region::non_resonant) {
      if (hits == 0) out.at(n0) += prod;
    } else if (hits >= 2) {
      out.at(n0) += spec.counting == ResonantCounting::set ? prod : double(hits - 1) * prod;
    }

    int j = arity - 1;
    while (j >= 0 && ++pos[j] == support[j].size()) pos[j--] = 0;
    if (j < 0) break;
  }
  return out;
}

}  // namespace

CoeffSequence multilinear_N(const MultilinearSpec& spec, std::span<const CoeffSequence> inputs,
                            double budget) {
  return multilinear(spec, inputs, budget, Region::non_resonant);
}

CoeffSequence multilinear_R(const MultilinearSpec& spec, std::span<const CoeffSequence> inputs,
                            double budget) {
  return multilinear(spec, inputs, budget, Region::resonant);
}

CoeffSequence convolve(const CoeffSequence& a, const CoeffSequence& b) {
  CoeffSequence out(a.n_max() + b.n_max());
  for (int m = -a.n_max(); m <= a.n_max(); ++m)
    for (int n = -b.n_max(); n <= b.n_max(); ++n) out.at(m + n) += a(m) * b(n);
  return out;
}

CoeffSequence conjugate(const CoeffSequence& a) {
  CoeffSequence out(a.n_max());
  for (int n = -a.n_max(); n <= a.n_max(); ++n) out.at(n) = std::conj(a(-n));
  return out;
}

DecompositionResult decomposition_check(int k, const CoeffSequence& v, ResonantCounting counting) {
  if (k < 1) throw std::invalid_argument("decomposition_check: k must be >= 1");
  const CoeffSequence q = convolve(v, conjugate(v));
  CoeffSequence qk = q;
  for (int j = 1; j < k; ++j) qk = convolve(qk, q);
  CoeffSequence lhs = convolve(qk, v);
  const Complex mean = double(k + 1) * qk(0);
  for (int n = -v.n_max(); n <= v.n_max(); ++n) lhs.at(n) -= mean * v(n);

  MultilinearSpec spec;
  spec.k = k;
  spec.counting = counting;
  const std::vector<CoeffSequence> inputs(2 * k + 1, v);
  const CoeffSequence nn = multilinear_N(spec, inputs);
  const CoeffSequence rr = multilinear_R(spec, inputs);

  DecompositionResult r;
  const int top = std::max(lhs.n_max(), nn.n_max());
  for (int n = -top; n <= top; ++n)
    r.max_error = std::max(r.max_error, std::abs(lhs(n) - (nn(n) - rr(n))));
  const double scale = std::pow(v.max_abs(), 2 * k + 1);
  r.relative_error = scale > 0 ? r.max_error / scale : r.max_error;
  return r;
}

namespace {

SpectralField gauged_nonlinear(const SpectralField& v, double t, const ModelParams& params) {
  const double g = gauge_value(v, params);
  SpectralField out = nonlinear_substep_collocation(v, t, params);
  out *= std::polar(1.0, g * t);
  return out;
}

}  // namespace

GaugeEquivalence gauged_flow_equivalence(const SpectralField& u0, const FlowConfig& cfg, double T) {
  if (u0.geometry().dim() != 1) throw std::invalid_argument("gauged_flow_equivalence: d must be 1");
  FlowConfig c = cfg;
  c.t_final = T;
  c.record_every = 1;
  c.keep_snapshots = true;
  const Trajectory u = evolve(u0, c, FlowMode::collocation);
  const Trajectory gu = apply_gauge(u, c.params, GaugeDirection::forward);

  GaugeEquivalence out;
  SpectralField v = u0;
  out.times.push_back(0.0);
  out.errors.push_back(l2_norm(v - gu.snapshots[0]));
  for (std::size_t j = 1; j < u.size(); ++j) {
    if (c.scheme == SplittingScheme::lie) {
      v = gauged_nonlinear(linear_substep(v, c.dt, c), c.dt, c.params);
    } else {
      v = linear_substep(v, 0.5 * c.dt, c);
      v = gauged_nonlinear(v, c.dt, c.params);
      v = linear_substep(v, 0.5 * c.dt, c);
    }
    out.times.push_back(u.times[j]);
    out.errors.push_back(l2_norm(v - gu.snapshots[j]));
  }
  out.discrepancy = *std::max_element(out.errors.begin(), out.errors.end());
  return out;
}

}  // namespace gnls
