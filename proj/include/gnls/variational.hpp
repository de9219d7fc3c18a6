#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gnls/measures.hpp"
#include "gnls/torus.hpp"

namespace gnls {

/// f_N(x) = N^{-d/2} sum_{N < |n| <= 2N} phi_n(x0) phi_n(x), real on the grid.
struct BumpField {
  SpectralField field;
  int N = 0;
  std::array<double, 2> x0{};
};

/// The geometry must hold |n| <= 2N.
BumpField build_bump(int N, const std::array<double, 2>& x0, const TorusGeometry& geometry);
/// Bump on a d-dimensional box of radius 2N with default oversampling.
BumpField build_bump(int N, double x0 = 0.0, int dim = 1);

struct BumpRow {
  int N = 0;
  double l2_sq = 0.0;
  double sup_norm = 0.0;
  /// min of f_N(x) / N^{1/2} over |x - x0| <= 0.1 / N (d = 1).
  double center_min = 0.0;
  std::vector<double> hs_norms;
};

struct BumpScan {
  std::vector<double> s_list;
  std::vector<BumpRow> rows;
  double sup_slope = 0.0;
  std::vector<double> hs_slopes;
};

BumpScan bump_norm_scan(const std::vector<int>& N_ladder, const std::vector<double>& s_list);

enum class SdeScheme { euler_maruyama, exact };

struct VariationalConfig {
  ModelParams params;
  double K = 1.0;
  double L = 1e4;
  double eta = 1.0;
  /// SDE step; zero selects the default stability rule.
  double dt_sde = 0.0;
  std::size_t M = 1000;
  SdeScheme scheme = SdeScheme::euler_maruyama;

  /// min(1 / (10 max_n a_n), 1e-3) when dt_sde is zero.
  double step() const;
  int steps() const;
  void validate() const;
};

/// OU rate a_n = <n>^{-alpha/2} N^{alpha/2}.
double ou_rate(const Mode& n, double alpha, int N);

/// Complex Brownian paths B_n and OU paths Z_n for |n| <= N on t_k = k dt.
struct DriftPath {
  std::vector<Mode> modes;
  double dt = 0.0;
  int steps = 0;
  /// B[m][k], Z[m][k] for mode m at step k (k = 0..steps).
  std::vector<std::vector<Complex>> B;
  std::vector<std::vector<Complex>> Z;

  /// All-zero path (Z suppressed) on the given modes.
  static DriftPath zero(const VariationalConfig& config);
};

DriftPath simulate_drift(const VariationalConfig& config, RngStream& rng);

/// (2pi)^{-d} [sum_{|n|<=N} <n>^{-alpha} (1 - e^{-2a_n}) / (2a_n) + sum_{|n|>N} <n>^{-alpha}].
double ou_gap_closed_form(double alpha, int N, int dim = 1);

/// Monte-Carlo estimate of E|Y(1,0) - Z_N(1,0)|^2; modes above N enter
/// through their exact contribution.
MeanEstimate ou_gap_estimate(const VariationalConfig& config, std::uint64_t seed);

/// 1/2 sum_k dt sum_n <n>^alpha |-(Z_{k+1} - Z_k)/dt + eta f_n|^2 over |n| <= 2N.
double drift_cost(const DriftPath& path, const VariationalConfig& config);

struct ObjectiveReport {
  double estimate = 0.0;
  double std_error = 0.0;
  double indicator_frequency = 0.0;
  double mean_cost = 0.0;
  double cost_std_error = 0.0;
  std::size_t ensemble_size = 0;
};

/// Monte-Carlo mean of gamma min(V(Y(1) + Theta), L) 1{||Y(1) + Theta|| <= K}
/// plus the drift cost, Theta = -Z_N(1) + eta f_N. Replica i uses (seed, i).
ObjectiveReport objective_estimate(const VariationalConfig& config, std::uint64_t seed);

struct DivergenceRow {
  double L = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct DivergenceScan {
  std::vector<DivergenceRow> rows;
  /// One-sided p-value for an increasing trend of the estimate in log L.
  double trend_pvalue = 1.0;
  bool strictly_increasing = false;
  /// Last two ladder points within one standard error.
  bool saturated = false;
};

/// E_mu[e^{-gamma min(V, L)} 1{||u||_{L^2} <= K}] along the L ladder with
/// common draws (sample i from (seed, i)).
DivergenceScan divergence_scan(const ModelParams& params, double K, const std::vector<double>& L_ladder,
                               std::size_t M, std::uint64_t seed);

}  // namespace gnls
