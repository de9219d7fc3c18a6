#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gnls/rng.hpp"
#include "gnls/stats.hpp"
#include "gnls/torus.hpp"

namespace gnls {

/// Physical and truncation parameters of the exponential NLS model.
struct ModelParams {
  int dim = 1;
  double alpha = 2.0;
  double beta = 0.5;
  double gamma = 1.0;
  int N = 16;
  double oversampling = kDefaultOversampling;

  /// Box |n|_inf <= N on an oversampled grid.
  TorusGeometry geometry() const { return TorusGeometry::with_oversampling(dim, N, oversampling); }
  /// Throws std::invalid_argument on out-of-range values. beta = 0 is
  /// allowed and makes the interaction constant.
  void validate() const;
};

/// Draws a_n = g_n <n>^{-alpha/2} for |n| <= cutoff on the given box and
/// leaves the rest zero. Draws are taken in coefficient order.
SpectralField sample_gaussian(const TorusGeometry& geometry, double alpha, double cutoff,
                              RngStream& rng);
SpectralField sample_gaussian(const ModelParams& params, RngStream& rng);

/// V_beta(u) = int e^{beta |u|^2} dx by grid quadrature, optionally clipped
/// to min(V, clip).
double potential(const SpectralField& u, double beta, std::optional<double> clip = std::nullopt);

double mass(const SpectralField& u);
/// 1/2 sum <n>^alpha |a_n|^2.
double kinetic_energy(const SpectralField& u, double alpha);
double hamiltonian(const SpectralField& u, const ModelParams& params);
/// Energy of the Galerkin system: kinetic part plus gamma V_beta(Pi_N u).
double truncated_hamiltonian(const SpectralField& u, const ModelParams& params);

/// e^{-gamma V_beta(Pi_N u)}.
double gibbs_weight(const SpectralField& u, const ModelParams& params);

enum class SamplingMode { importance, rejection };

struct GibbsEnsemble {
  SamplingMode mode = SamplingMode::importance;
  std::vector<SpectralField> samples;
  /// Importance weights (all ones in rejection mode).
  std::vector<double> weights;
  /// Stream id each sample was drawn from.
  std::vector<std::uint64_t> sample_ids;
  std::size_t proposals = 0;
  double partition = 0.0;
  double partition_stderr = 0.0;
  double max_weight_fraction = 0.0;
};

/// Samples rho_{alpha,beta,N} against mu_alpha. Sample i uses the stream
/// (seed, i). Importance mode keeps every draw with weight e^{-gamma V};
/// rejection mode accepts with probability e^{-gamma (V - vol)} and needs
/// gamma >= 0.
GibbsEnsemble gibbs_ensemble(const ModelParams& params, std::size_t M, std::uint64_t seed,
                             SamplingMode mode, std::optional<double> clip = std::nullopt);

struct ObservableEstimate {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double ess = 0.0;
};

struct EnsembleReport {
  std::size_t ensemble_size = 0;
  double max_weight_fraction = 0.0;
  std::vector<ObservableEstimate> observables;

  const ObservableEstimate& at(const std::string& name) const;
};

/// Weighted summary of per-sample observable columns.
EnsembleReport summarize(const std::vector<std::string>& names,
                         const std::vector<std::vector<double>>& columns,
                         const std::vector<double>& weights);

/// (1 - p beta sigma_{alpha,N})^{-1}; throws std::domain_error once
/// p beta sigma >= 1.
double exp_moment_oracle(const ModelParams& params, double p);

/// Plain Monte-Carlo average of e^{p beta |Pi_N u(x)|^2} over M draws of
/// mu_alpha, sample i from stream (seed, i).
MeanEstimate exp_moment_mc(const ModelParams& params, double p, std::size_t M, std::uint64_t seed,
                           double x = 0.0);

struct TailNorm {
  double s = 0.0;
  /// Lebesgue exponent; 2 uses the coefficient sum, infinity the grid max.
  double r = 2.0;
  /// Restricts to the increment Pi_{<=N} Pi_{>N1} when set.
  std::optional<int> low_cutoff;
};

struct TailFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> thresholds;
  std::vector<double> frequencies;
  /// All norms vanish (empty frequency band) or too few exceedances to fit.
  bool degenerate = false;
};

double field_norm(const SpectralField& u, const TailNorm& norm);

/// Least-squares slope of log P(||u|| > R) against R^2 over the thresholds
/// with at least min_count exceedances. variance_scale multiplies the
/// covariance of the sampled field.
TailFit tail_fit(const ModelParams& params, const TailNorm& norm, const std::vector<double>& R_grid,
                 std::size_t M, std::uint64_t seed, double variance_scale = 1.0,
                 std::size_t min_count = 10);

}  // namespace gnls
