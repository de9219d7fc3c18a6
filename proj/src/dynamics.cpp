#include "gnls/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace gnls {

void FlowConfig::validate() const {
  params.validate();
  if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("FlowConfig: dt must be > 0");
  if (!(t_final >= 0) || !std::isfinite(t_final))
    throw std::invalid_argument("FlowConfig: t_final must be >= 0");
  if (nonlinear_substeps < 1) throw std::invalid_argument("FlowConfig: nonlinear_substeps must be >= 1");
  if (record_every < 1) throw std::invalid_argument("FlowConfig: record_every must be >= 1");
}

double dispersion(const Mode& n, double alpha, DispersionSymbol symbol) {
  if (symbol == DispersionSymbol::bracket) return std::pow(bracket(n), alpha);
  const int q = norm_sq(n);
  return q == 0 ? 0.0 : std::pow(double(q), 0.5 * alpha);
}

SpectralField linear_substep(const SpectralField& u, double t, const FlowConfig& cfg) {
  SpectralField out = u;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double w = dispersion(u.geometry().mode_at(i), cfg.params.alpha, cfg.symbol);
    out.at(i) *= std::polar(1.0, -t * w);
  }
  return out;
}

SpectralField nonlinear_substep_collocation(const SpectralField& u, double t,
                                            const ModelParams& params) {
  if (params.gamma == 0.0) return u;
  GridField g = to_grid(u);
  const double c = 2.0 * params.gamma * params.beta * t;
  for (auto& v : g.values()) v *= std::polar(1.0, -c * std::exp(params.beta * std::norm(v)));
  return from_grid(g);
}

namespace {

// -i 2 gamma beta Pi_N[e^{beta |Pi_N u|^2} Pi_N u], with u already supported on |n| <= N.
SpectralField galerkin_rhs(const SpectralField& low, const ModelParams& params) {
  GridField g = to_grid(low);
  const double c = 2.0 * params.gamma * params.beta;
  for (auto& v : g.values()) v *= Complex(0.0, -c) * std::exp(params.beta * std::norm(v));
  return project(from_grid(g), params.N);
}

}  // namespace

SpectralField nonlinear_substep_galerkin(const SpectralField& u, double t,
                                         const ModelParams& params, int substeps) {
  if (substeps < 1) throw std::invalid_argument("nonlinear_substep_galerkin: substeps must be >= 1");
  if (params.gamma == 0.0) return u;
  SpectralField low = project(u, params.N);
  const SpectralField high = project_high(u, params.N);
  const double h = t / substeps;
  for (int k = 0; k < substeps; ++k) {
    const SpectralField k1 = galerkin_rhs(low, params);
    const SpectralField k2 = galerkin_rhs(low + Complex(0.5 * h) * k1, params);
    const SpectralField k3 = galerkin_rhs(low + Complex(0.5 * h) * k2, params);
    const SpectralField k4 = galerkin_rhs(low + Complex(h) * k3, params);
    for (std::size_t i = 0; i < low.size(); ++i)
      low.at(i) += h / 6.0 * (k1.at(i) + 2.0 * k2.at(i) + 2.0 * k3.at(i) + k4.at(i));
  }
  return low + high;
}

namespace {

SpectralField nonlinear(const SpectralField& u, double t, const FlowConfig& cfg, FlowMode mode) {
  return mode == FlowMode::galerkin
             ? nonlinear_substep_galerkin(u, t, cfg.params, cfg.nonlinear_substeps)
             : nonlinear_substep_collocation(u, t, cfg.params);
}

long step_count(double t, double dt) {
  const double ratio = std::abs(t) / dt;
  const long n = std::lround(ratio);
  if (std::abs(ratio - n) > 1e-6 * std::max(1.0, ratio))
    throw std::invalid_argument("evolve: horizon must be an integer multiple of dt");
  return n;
}

}  // namespace

SpectralField flow_step(const SpectralField& u, double dt, const FlowConfig& cfg, FlowMode mode) {
  if (cfg.scheme == SplittingScheme::lie) return nonlinear(linear_substep(u, dt, cfg), dt, cfg, mode);
  SpectralField v = linear_substep(u, 0.5 * dt, cfg);
  v = nonlinear(v, dt, cfg, mode);
  return linear_substep(v, 0.5 * dt, cfg);
}

Diagnostics diagnose(const SpectralField& u, const FlowConfig& cfg, FlowMode mode) {
  Diagnostics d;
  d.mass = mass(u);
  double kin = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    kin += dispersion(u.geometry().mode_at(i), cfg.params.alpha, cfg.symbol) * std::norm(u.at(i));
  d.potential = mode == FlowMode::galerkin ? potential(project(u, cfg.params.N), cfg.params.beta)
                                           : potential(u, cfg.params.beta);
  d.hamiltonian = 0.5 * kin + cfg.params.gamma * d.potential;
  d.hs_norm = sobolev_norm(u, cfg.hs_index);
  return d;
}

Trajectory evolve(const SpectralField& u0, const FlowConfig& cfg, FlowMode mode) {
  cfg.validate();
  const long steps = step_count(cfg.t_final, cfg.dt);
  Trajectory tr;
  auto record = [&](long k, const SpectralField& u) {
    tr.times.push_back(k * cfg.dt);
    if (cfg.keep_snapshots) tr.snapshots.push_back(u);
    tr.diagnostics.push_back(diagnose(u, cfg, mode));
  };
  SpectralField u = u0;
  record(0, u);
  for (long k = 1; k <= steps; ++k) {
    u = flow_step(u, cfg.dt, cfg, mode);
    if (k % cfg.record_every == 0 || k == steps) record(k, u);
  }
  return tr;
}

SpectralField evolve_to(const SpectralField& u0, double t, const FlowConfig& cfg, FlowMode mode) {
  cfg.validate();
  const long steps = step_count(t, cfg.dt);
  const double dt = t < 0 ? -cfg.dt : cfg.dt;
  SpectralField u = u0;
  for (long k = 0; k < steps; ++k) u = flow_step(u, dt, cfg, mode);
  return u;
}

namespace {

double max_relative_drift(const std::vector<Diagnostics>& d, double Diagnostics::*field) {
  if (d.empty()) return 0.0;
  const double ref = d.front().*field;
  double m = 0.0;
  for (const auto& x : d) m = std::max(m, std::abs(x.*field - ref));
  return ref != 0.0 ? m / std::abs(ref) : m;
}

}  // namespace

double Trajectory::relative_mass_drift() const { return max_relative_drift(diagnostics, &Diagnostics::mass); }

double Trajectory::relative_hamiltonian_drift() const {
  return max_relative_drift(diagnostics, &Diagnostics::hamiltonian);
}

void Trajectory::write_csv(std::ostream& out) const {
  out << "t,mass,hamiltonian,potential,h_s_norm\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto& d = diagnostics[i];
    out << times[i] << ',' << d.mass << ',' << d.hamiltonian << ',' << d.potential << ','
        << d.hs_norm << '\n';
  }
}

LiouvilleResult liouville_check(const FlowConfig& cfg, const SpectralField& probe, double h) {
  cfg.validate();
  if (!(h > 0)) throw std::invalid_argument("liouville_check: h must be > 0");
  const auto& g = probe.geometry();
  std::vector<std::size_t> idx;
  const double c2 = double(cfg.params.N) * cfg.params.N;
  for (std::size_t i = 0; i < g.num_modes(); ++i)
    if (norm_sq(g.mode_at(i)) <= c2) idx.push_back(i);
  const int n = static_cast<int>(2 * idx.size());
  if (n > 20) throw std::invalid_argument("liouville_check: real dimension exceeds 20");

  auto coord = [&](const SpectralField& u, int j) {
    const Complex c = u.at(idx[j / 2]);
    return j % 2 == 0 ? c.real() : c.imag();
  };
  auto perturbed = [&](int j, double delta) {
    SpectralField u = probe;
    Complex& c = u.at(idx[j / 2]);
    c += j % 2 == 0 ? Complex(delta, 0.0) : Complex(0.0, delta);
    return flow_step(u, cfg.dt, cfg, FlowMode::galerkin);
  };

  Eigen::MatrixXd J(n, n);
  for (int j = 0; j < n; ++j) {
    const double step = h * std::max(1.0, std::abs(coord(probe, j)));
    const SpectralField plus = perturbed(j, step);
    const SpectralField minus = perturbed(j, -step);
    for (int i = 0; i < n; ++i) J(i, j) = (coord(plus, i) - coord(minus, i)) / (2.0 * step);
  }
  LiouvilleResult r;
  r.dimension = n;
  r.determinant = J.partialPivLu().determinant();
  r.deviation = std::abs(r.determinant - 1.0);
  return r;
}

TruncationTable truncation_convergence(const SpectralField& u0, const FlowConfig& cfg,
                                       const std::vector<int>& N_ladder, int N_ref, double s) {
  cfg.validate();
  if (N_ladder.empty()) throw std::invalid_argument("truncation_convergence: empty ladder");
  for (int N : N_ladder)
    if (N < 0 || N > N_ref)
      throw std::invalid_argument("truncation_convergence: ladder must lie in [0, N_ref]");
  if (N_ref > u0.geometry().n_max())
    throw std::invalid_argument("truncation_convergence: N_ref exceeds the field's box");

  auto run = [&](int N) {
    FlowConfig c = cfg;
    c.params.N = N;
    c.keep_snapshots = true;
    return evolve(u0, c, FlowMode::galerkin);
  };
  const Trajectory ref = run(N_ref);

  TruncationTable table;
  table.rows.resize(N_ladder.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t k = 0; k < N_ladder.size(); ++k) {
    const int N = N_ladder[k];
    const Trajectory tr = run(N);
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i)
      worst = std::max(worst, sobolev_norm(project(tr.snapshots[i], N) - ref.snapshots[i], s));
    table.rows[k] = {N, worst};
  }

  table.monotone = true;
  for (std::size_t k = 1; k < table.rows.size(); ++k)
    if (!(table.rows[k].error < table.rows[k - 1].error)) table.monotone = false;
  std::vector<double> lx, ly;
  for (const auto& r : table.rows)
    if (r.N > 0 && r.error > 0) {
      lx.push_back(std::log(double(r.N)));
      ly.push_back(std::log(r.error));
    }
  if (lx.size() >= 2) {
    bool distinct = false;
    for (double v : lx) distinct = distinct || v != lx.front();
    if (distinct) table.decay_order = linear_fit(lx, ly).slope;
  }
  return table;
}

}  // namespace gnls
