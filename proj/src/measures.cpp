#include "gnls/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gnls {

void ModelParams::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("ModelParams: dim must be 1 or 2");
  if (!std::isfinite(alpha)) throw std::invalid_argument("ModelParams: alpha must be finite");
  if (!(beta >= 0) || !std::isfinite(beta))
    throw std::invalid_argument("ModelParams: beta must be >= 0");
  if (!std::isfinite(gamma)) throw std::invalid_argument("ModelParams: gamma must be finite");
  if (N < 0) throw std::invalid_argument("ModelParams: N must be >= 0");
  if (!(oversampling >= 1)) throw std::invalid_argument("ModelParams: oversampling must be >= 1");
}

SpectralField sample_gaussian(const TorusGeometry& geometry, double alpha, double cutoff,
                              RngStream& rng) {
  if (!std::isfinite(cutoff))
    throw std::invalid_argument("sample_gaussian: sampling needs a finite cutoff");
  SpectralField u(geometry);
  const double c2 = cutoff * cutoff;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Mode n = geometry.mode_at(i);
    if (norm_sq(n) > c2) continue;
    u.at(i) = rng.complex_normal() * std::pow(bracket(n), -0.5 * alpha);
  }
  return u;
}

SpectralField sample_gaussian(const ModelParams& params, RngStream& rng) {
  return sample_gaussian(params.geometry(), params.alpha, params.N, rng);
}

double potential(const SpectralField& u, double beta, std::optional<double> clip) {
  if (beta < 0) throw std::invalid_argument("potential: beta must be >= 0");
  const GridField g = to_grid(u);
  double acc = 0.0;
  for (const auto& v : g.values()) acc += std::exp(beta * std::norm(v));
  const double value = acc * g.cell_volume();
  return clip ? std::min(value, *clip) : value;
}

double mass(const SpectralField& u) {
  double acc = 0.0;
  for (const auto& c : u.coeffs()) acc += std::norm(c);
  return 0.5 * acc;
}

double kinetic_energy(const SpectralField& u, double alpha) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    acc += std::pow(bracket(u.geometry().mode_at(i)), alpha) * std::norm(u.at(i));
  return 0.5 * acc;
}

double hamiltonian(const SpectralField& u, const ModelParams& params) {
  return kinetic_energy(u, params.alpha) + params.gamma * potential(u, params.beta);
}

double truncated_hamiltonian(const SpectralField& u, const ModelParams& params) {
  return kinetic_energy(u, params.alpha) +
         params.gamma * potential(project(u, params.N), params.beta);
}

double gibbs_weight(const SpectralField& u, const ModelParams& params) {
  return std::exp(-params.gamma * potential(project(u, params.N), params.beta));
}

GibbsEnsemble gibbs_ensemble(const ModelParams& params, std::size_t M, std::uint64_t seed,
                             SamplingMode mode, std::optional<double> clip) {
  params.validate();
  if (M == 0) throw std::invalid_argument("gibbs_ensemble: M must be > 0");
  const double vol = std::pow(kTwoPi, params.dim);
  GibbsEnsemble out;
  out.mode = mode;

  if (mode == SamplingMode::importance) {
    std::vector<SpectralField> samples(M, SpectralField(params.geometry()));
    std::vector<double> w(M);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < M; ++i) {
      RngStream rng(seed, i);
      samples[i] = sample_gaussian(params, rng);
      w[i] = std::exp(-params.gamma * potential(project(samples[i], params.N), params.beta, clip));
    }
    out.samples = std::move(samples);
    out.weights = w;
    out.sample_ids.resize(M);
    for (std::size_t i = 0; i < M; ++i) out.sample_ids[i] = i;
    out.proposals = M;
    const auto est = mean_estimate(w);
    out.partition = est.mean;
    out.partition_stderr = est.std_error;
  } else {
    if (params.gamma < 0)
      throw std::invalid_argument("gibbs_ensemble: rejection sampling needs gamma >= 0");
    const std::size_t max_proposals = std::max<std::size_t>(1000 * M, 1000000);
    const std::size_t batch = std::max<std::size_t>(M, 256);
    std::size_t next = 0;
    while (out.samples.size() < M) {
      if (next >= max_proposals)
        throw std::runtime_error("gibbs_ensemble: acceptance rate too low for rejection sampling");
      std::vector<SpectralField> drawn(batch, SpectralField(params.geometry()));
      std::vector<char> accepted(batch);
#pragma omp parallel for schedule(dynamic, 16)
      for (std::size_t j = 0; j < batch; ++j) {
        RngStream rng(seed, next + j);
        drawn[j] = sample_gaussian(params, rng);
        const double v = potential(project(drawn[j], params.N), params.beta, clip);
        accepted[j] = rng.uniform() < std::exp(-params.gamma * (v - vol));
      }
      for (std::size_t j = 0; j < batch && out.samples.size() < M; ++j) {
        ++out.proposals;
        if (!accepted[j]) continue;
        out.samples.push_back(std::move(drawn[j]));
        out.sample_ids.push_back(next + j);
      }
      next += batch;
    }
    out.weights.assign(M, 1.0);
    const double n = static_cast<double>(out.proposals);
    const double rate = static_cast<double>(M) / n;
    const double scale = std::exp(-params.gamma * vol);
    out.partition = rate * scale;
    out.partition_stderr = scale * std::sqrt(rate * (1.0 - rate) / n);
  }

  double total = 0.0, wmax = 0.0;
  for (double v : out.weights) {
    total += v;
    wmax = std::max(wmax, v);
  }
  out.max_weight_fraction = total > 0 ? wmax / total : 1.0;
  return out;
}

const ObservableEstimate& EnsembleReport::at(const std::string& name) const {
  for (const auto& o : observables)
    if (o.name == name) return o;
  throw std::out_of_range("EnsembleReport: no observable '" + name + "'");
}

EnsembleReport summarize(const std::vector<std::string>& names,
                         const std::vector<std::vector<double>>& columns,
                         const std::vector<double>& weights) {
  if (names.size() != columns.size()) throw std::invalid_argument("summarize: name count mismatch");
  EnsembleReport r;
  r.ensemble_size = weights.size();
  double total = 0.0, wmax = 0.0;
  for (double v : weights) {
    total += v;
    wmax = std::max(wmax, v);
  }
  r.max_weight_fraction = total > 0 ? wmax / total : 1.0;
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto e = weighted_estimate(columns[k], weights);
    r.observables.push_back({names[k], e.estimate, e.std_error, e.ess});
  }
  return r;
}

double exp_moment_oracle(const ModelParams& params, double p) {
  const double c = p * params.beta * sigma(params.alpha, params.N, params.dim);
  if (c >= 1.0)
    throw std::domain_error("exp_moment_oracle: p beta sigma >= 1, moment is infinite");
  return 1.0 / (1.0 - c);
}

MeanEstimate exp_moment_mc(const ModelParams& params, double p, std::size_t M, std::uint64_t seed,
                           double x) {
  params.validate();
  const TorusGeometry g = params.geometry();
  const double c2 = double(params.N) * params.N;
  // phi_n(x) and <n>^{-alpha/2} for the retained modes, in draw order.
  std::vector<Complex> basis;
  for (std::size_t i = 0; i < g.num_modes(); ++i) {
    const Mode n = g.mode_at(i);
    if (norm_sq(n) > c2) continue;
    const double phase = (n[0] + n[1]) * x;
    basis.push_back(std::polar(std::pow(kTwoPi, -0.5 * params.dim) * std::pow(bracket(n), -0.5 * params.alpha), phase));
  }
  const double pb = p * params.beta;
  std::vector<double> values(M);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < M; ++i) {
    RngStream rng(seed, i);
    Complex ux = 0.0;
    for (const auto& b : basis) ux += rng.complex_normal() * b;
    values[i] = std::exp(pb * std::norm(ux));
  }
  return mean_estimate(values);
}

double field_norm(const SpectralField& u, const TailNorm& norm) {
  const SpectralField v = norm.low_cutoff ? project_high(u, *norm.low_cutoff) : u;
  if (norm.r == 2.0) return sobolev_norm(v, norm.s);
  SpectralField w = v;
  for (std::size_t i = 0; i < w.size(); ++i)
    w.at(i) *= std::pow(bracket(w.geometry().mode_at(i)), norm.s);
  const GridField g = to_grid(w);
  if (std::isinf(norm.r)) {
    double m = 0.0;
    for (const auto& z : g.values()) m = std::max(m, std::abs(z));
    return m;
  }
  if (!(norm.r >= 1)) throw std::invalid_argument("field_norm: r must be >= 1");
  double acc = 0.0;
  for (const auto& z : g.values()) acc += std::pow(std::abs(z), norm.r);
  return std::pow(acc * g.cell_volume(), 1.0 / norm.r);
}

TailFit tail_fit(const ModelParams& params, const TailNorm& norm, const std::vector<double>& R_grid,
                 std::size_t M, std::uint64_t seed, double variance_scale, std::size_t min_count) {
  params.validate();
  if (!(variance_scale > 0)) throw std::invalid_argument("tail_fit: variance_scale must be > 0");
  if (R_grid.empty()) throw std::invalid_argument("tail_fit: empty threshold grid");
  std::vector<double> norms(M);
  const double amp = std::sqrt(variance_scale);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < M; ++i) {
    RngStream rng(seed, i);
    SpectralField u = sample_gaussian(params, rng);
    u *= amp;
    norms[i] = field_norm(u, norm);
  }

  TailFit fit;
  if (std::all_of(norms.begin(), norms.end(), [](double v) { return v == 0.0; })) {
    fit.degenerate = true;
    fit.slope = fit.intercept = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  std::vector<double> xs, ys;
  for (double R : R_grid) {
    const auto count = static_cast<std::size_t>(
        std::count_if(norms.begin(), norms.end(), [R](double v) { return v > R; }));
    fit.thresholds.push_back(R);
    fit.frequencies.push_back(double(count) / M);
    if (count >= min_count) {
      xs.push_back(R * R);
      ys.push_back(std::log(double(count) / M));
    }
  }
  if (xs.size() < 2) {
    fit.degenerate = true;
    fit.slope = fit.intercept = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const auto lf = linear_fit(xs, ys);
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  fit.r_squared = lf.r_squared;
  return fit;
}

}  // namespace gnls
