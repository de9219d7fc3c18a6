#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gnls/harness.hpp"

using namespace gnls;

namespace {

constexpr std::uint64_t kSeed = 20261016;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return linear_fit(lx, ly).slope;
}

SpectralField smooth_datum(const TorusGeometry& g) {
  SpectralField u(g);
  for (int n = -6; n <= 6; ++n) u[{n, 0}] = std::polar(1.2 * std::exp(-0.5 * std::abs(n)), 0.7 * n);
  return u;
}

Outcome moment_oracle() {
  int configs = 0, good_configs = 0, hits = 0, total = 0;
  std::string worst;
  for (double alpha : {1.5, 2.0, 3.0})
    for (int N : {1, 4, 16})
      for (double c : {0.2, 0.5, 0.8}) {
        ModelParams p;
        p.alpha = alpha;
        p.N = N;
        p.beta = c / sigma(alpha, N, 1);
        const double oracle = exp_moment_oracle(p, 1.0);
        int ok = 0;
        for (int r = 0; r < 20; ++r) {
          const MeanEstimate m = exp_moment_mc(p, 1.0, 100000, kSeed + r);
          ok += std::abs(m.mean - oracle) <= 3.0 * m.std_error;
        }
        ++configs;
        hits += ok;
        total += 20;
        if (ok >= 19) {
          ++good_configs;
        } else {
          worst += fmt(" (a=%g N=%d c=%g: %d/20)", alpha, N, c, ok);
        }
      }
  return {good_configs == configs,
          fmt("%d/%d configs with >=19/20 repeats inside 3 SE, pooled %d/%d;", good_configs, configs, hits, total) +
              (worst.empty() ? std::string(" all ok") : worst)};
}

Outcome resonance() {
  const GaugeCheckReport r = gauge_check({1, 2, 3}, 4, 100, 1e-10, kSeed);
  CoeffSequence c(1);
  c.at(0) = 1.0;
  c.at(1) = 2.0;
  MultilinearSpec spec;
  const std::vector<CoeffSequence> in(3, c);
  const Complex hand = multilinear_N(spec, in)(0) - multilinear_R(spec, in)(0);
  const bool pass = r.pass && hand == Complex(-1.0, 0.0);
  return {pass, fmt("max relative error %.2e over %d trials per k; hand case N3(0)-R3(0) = %g%+gi",
                    r.max_error, r.trials, hand.real(), hand.imag())};
}

Outcome conservation() {
  std::vector<double> dts{4e-3, 2e-3, 1e-3, 5e-4}, h_drift;
  double mass_ref = 0.0, h_ref = 0.0;
  for (double dt : dts) {
    FlowConfig c;
    c.params.alpha = 2.0;
    c.params.N = 16;
    c.params.beta = 0.5;
    c.params.gamma = 1.0;
    c.dt = dt;
    c.t_final = 10.0;
    c.keep_snapshots = false;
    RngStream rng(kSeed, 0);
    const SpectralField u0 = sample_gaussian(c.params, rng);
    const Trajectory tr = evolve(u0, c, FlowMode::galerkin);
    h_drift.push_back(tr.relative_hamiltonian_drift());
    if (dt == 1e-3) {
      mass_ref = tr.relative_mass_drift();
      h_ref = tr.relative_hamiltonian_drift();
    }
  }
  const double order = loglog_slope(dts, h_drift);
  const bool pass = mass_ref <= 1e-10 && h_ref <= 1e-6 && order >= 1.8 && order <= 2.2;
  return {pass, fmt("dt=1e-3: mass drift %.2e (<=1e-10), H drift %.2e (<=1e-6); H drifts %.2e %.2e %.2e %.2e, "
                    "order %.3f (in [1.8,2.2])",
                    mass_ref, h_ref, h_drift[0], h_drift[1], h_drift[2], h_drift[3], order)};
}

Outcome liouville() {
  FlowConfig c;
  c.params.alpha = 2.0;
  c.params.N = 2;
  c.params.beta = 0.5;
  c.params.gamma = 1.0;
  c.dt = 1e-3;
  double worst = 0.0;
  int dim = 0;
  for (int i = 0; i < 5; ++i) {
    RngStream rng(kSeed, i);
    const LiouvilleResult r = liouville_check(c, sample_gaussian(c.params, rng));
    worst = std::max(worst, r.deviation);
    dim = r.dimension;
  }
  return {worst <= 1e-6, fmt("max |det-1| = %.2e over 5 probes (dimension %d)", worst, dim)};
}

Outcome invariance() {
  FlowConfig c;
  c.params.alpha = 2.5;
  c.params.N = 8;
  c.params.beta = 0.1 / sigma(2.5, 8, 1);
  c.params.gamma = 1.0;
  c.dt = 1e-2;
  c.t_final = 1.0;
  InvarianceSettings s;
  const InvarianceReport r = invariance_test(c, 1.0, 20000, kSeed, s);
  std::string zs;
  for (const auto& o : r.observables) zs += fmt(" %s=%.2f", o.name.c_str(), o.z);
  const bool detected = std::abs(r.control.z) > 3.0;
  return {r.max_abs_z <= 3.0 && detected,
          fmt("max |z| %.2f (<=3); control z %.2f (>3); ess %.0f;", r.max_abs_z, r.control.z, r.ess) + zs};
}

Outcome bump_scaling() {
  const std::vector<int> ladder{8, 16, 32, 64, 128, 256, 512};
  const BumpScan scan = bump_norm_scan(ladder, {1.0});
  double l2_err = 0.0, ratio_max = 0.0;
  bool center_positive = true;
  for (const auto& row : scan.rows) {
    l2_err = std::max(l2_err, std::abs(row.l2_sq - 1.0 / kPi));
    ratio_max = std::max(ratio_max, row.hs_norms[0] / row.N);
    center_positive = center_positive && row.center_min > 0;
  }
  const double h1_slope = scan.hs_slopes[0];
  const bool pass = l2_err <= 1e-12 && scan.sup_slope >= 0.45 && scan.sup_slope <= 0.55 && h1_slope <= 1.05 &&
                    ratio_max <= 1.0 && center_positive;
  return {pass, fmt("max |l2^2 - 1/pi| %.1e; sup exponent %.4f; H1 exponent %.4f, max H1/N %.4f (last %.4f)",
                    l2_err, scan.sup_slope, h1_slope, ratio_max, scan.rows.back().hs_norms[0] / ladder.back())};
}

Outcome ou_oracle() {
  bool pass = true;
  std::string detail;
  for (double alpha : {2.0, 2.5})
    for (int N : {4, 16, 64}) {
      VariationalConfig v;
      v.params.alpha = alpha;
      v.params.N = N;
      v.M = 10000;
      const double cf = ou_gap_closed_form(alpha, N);
      const MeanEstimate em = ou_gap_estimate(v, kSeed);
      const double z = (em.mean - cf) / em.std_error;
      pass = pass && std::abs(z) <= 3.0;
      v.scheme = SdeScheme::exact;
      v.M = 2000;
      const MeanEstimate ex = ou_gap_estimate(v, kSeed);
      detail += fmt(" (a=%g N=%d: EM z=%.2f, exact z=%.2f)", alpha, N, z, (ex.mean - cf) / ex.std_error);
    }
  return {pass, "Euler-Maruyama |z| <= 3 required;" + detail};
}

Outcome focusing_divergence() {
  ModelParams p;
  p.alpha = 2.0;
  p.N = 16;
  p.beta = 0.5;
  const std::vector<double> L{1e1, 1e2, 1e3, 1e4};
  p.gamma = -1.0;
  const DivergenceScan foc = divergence_scan(p, 1.0, L, 100000, kSeed);
  p.gamma = 1.0;
  const DivergenceScan def = divergence_scan(p, 1.0, L, 100000, kSeed);
  std::string est;
  for (const auto& r : foc.rows) est += fmt(" %.5g", r.estimate);
  const bool pass = foc.strictly_increasing && foc.trend_pvalue < 0.01 && def.saturated;
  return {pass, fmt("focusing: strictly increasing %d, trend p %.3g, estimates", foc.strictly_increasing,
                    foc.trend_pvalue) +
                    est + fmt("; control saturated %d", def.saturated)};
}

Outcome gauge_equivalence() {
  std::vector<double> dts{1e-3, 5e-4, 2.5e-4, 1e-4}, disc;
  for (double dt : dts) {
    FlowConfig c;
    c.params.alpha = 2.0;
    c.params.N = 8;
    c.params.beta = 0.5;
    c.params.gamma = 1.0;
    c.dt = dt;
    SpectralField u(c.params.geometry());
    u[{0, 0}] = 0.8;
    u[{1, 0}] = {0.3, 0.2};
    u[{-2, 0}] = 0.25;
    disc.push_back(gauged_flow_equivalence(u, c, 0.5).discrepancy);
  }
  const double order = loglog_slope(dts, disc);
  const bool pass = disc.back() <= 1e-6 && order >= 1.8 && order <= 2.2;
  return {pass, fmt("discrepancy %.2e %.2e %.2e %.2e; at dt=1e-4 %.2e (<=1e-6); order %.3f", disc[0], disc[1],
                    disc[2], disc[3], disc.back(), order)};
}

Outcome truncation() {
  FlowConfig c;
  c.params.alpha = 2.0;
  c.params.beta = 0.5;
  c.params.gamma = 1.0;
  c.dt = 1e-3;
  c.t_final = 1.0;
  const SpectralField u0 = smooth_datum(TorusGeometry::with_oversampling(1, 64));
  const TruncationTable t = truncation_convergence(u0, c, {8, 16, 32}, 64, 0.5);
  return {t.monotone, fmt("errors %.3e %.3e %.3e; decay order %.2f", t.rows[0].error, t.rows[1].error,
                          t.rows[2].error, t.decay_order)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget_s = 0.0;
  };
  const std::vector<Criterion> criteria{
            {1, "moment-oracle", moment_oracle, 30.0},
      {2, "resonance-decomposition", resonance},
      {3, "conservation", conservation, 60.0},
      {4, "liouville", liouville},
      {5, "invariance", invariance, 600.0},
      {6, "bump-scaling", bump_scaling},
      {7, "ou-oracle", ou_oracle},
      {8, "focusing-divergence", focusing_divergence},
      {9, "gauge-equivalence", gauge_equivalence},
      {10, "truncation-convergence", truncation},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.budget_s);
    }
    failed += !o.pass;
    std::printf("[%s] %2d %-24s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
