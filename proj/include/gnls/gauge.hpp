#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gnls/dynamics.hpp"
#include "gnls/torus.hpp"

namespace gnls {

/// Coefficients of the standard Fourier series u(x) = sum_{|n| <= n_max} c_n e^{inx}.
class CoeffSequence {
 public:
  explicit CoeffSequence(int n_max = 0);
  CoeffSequence(int n_max, std::vector<Complex> coeffs);

  /// c_n = a_n / sqrt(2 pi); requires d = 1.
  static CoeffSequence from_field(const SpectralField& u);
  SpectralField to_field(const TorusGeometry& geometry) const;

  int n_max() const { return n_max_; }
  /// Zero outside the stored range.
  Complex operator()(int n) const;
  Complex& at(int n) { return c_[static_cast<std::size_t>(n + n_max_)]; }
  std::span<const Complex> coeffs() const { return c_; }
  double max_abs() const;

 private:
  int n_max_;
  std::vector<Complex> c_;
};

/// (1 / 2pi) int f dx.
Complex mean_functional(const GridField& f);
Complex mean_functional(const CoeffSequence& f);

/// 2 gamma beta A[(1 + beta |u|^2) e^{beta |u|^2}].
double gauge_value(const SpectralField& u, const ModelParams& params);
/// 2 gamma beta sum_{k < terms} beta^k / k! (k + 1) A[|u|^{2k}].
double gauge_value_series(const SpectralField& u, const ModelParams& params, int terms = 50);

enum class GaugeDirection { forward, inverse };

/// Multiplies snapshot j by e^{+-i int_0^{t_j} G(u) dt}, the integral taken by
/// cumulative composite Simpson over the stored snapshots.
Trajectory apply_gauge(const Trajectory& traj, const ModelParams& params, GaugeDirection direction);

/// Cumulative Simpson integrals of uniformly spaced samples; entry j
/// approximates int_0^{t_j}.
std::vector<double> cumulative_simpson(std::span<const double> f, double h);

/// How tuples with several odd-position frequencies equal to n_0 enter R.
/// multiplicity weights a tuple with m such positions by m - 1; set counts
/// it once.
enum class ResonantCounting { multiplicity, set };

struct MultilinearSpec {
  int k = 1;
  /// Reverses every sign iota_j = (-1)^{j+1}.
  bool flipped = false;
  ResonantCounting counting = ResonantCounting::multiplicity;

  int arity() const { return 2 * k + 1; }
  int sign(int j) const;
};

inline constexpr double kEnumerationBudget = 1e8;

/// Sum over n_0 = sum_j iota_j n_j of prod_j c_j(n_j) (conjugated when
/// iota_j = -1) over tuples with no odd position equal to n_0.
CoeffSequence multilinear_N(const MultilinearSpec& spec, std::span<const CoeffSequence> inputs,
                            double budget = kEnumerationBudget);
/// Same sum restricted to tuples with at least two odd positions equal to n_0.
CoeffSequence multilinear_R(const MultilinearSpec& spec, std::span<const CoeffSequence> inputs,
                            double budget = kEnumerationBudget);

/// Coefficients of a product of functions given by their Fourier series.
CoeffSequence convolve(const CoeffSequence& a, const CoeffSequence& b);
/// Coefficients of the complex conjugate function.
CoeffSequence conjugate(const CoeffSequence& a);

struct DecompositionResult {
  double max_error = 0.0;
  /// max_error / max|c|^{2k+1}.
  double relative_error = 0.0;
};

/// Compares (|v|^{2k} - (k + 1) A[|v|^{2k}]) v with N_{2k+1}(v) - R_{2k+1}(v).
DecompositionResult decomposition_check(int k, const CoeffSequence& v,
                                        ResonantCounting counting = ResonantCounting::multiplicity);

struct GaugeEquivalence {
  double discrepancy = 0.0;
  std::vector<double> times;
  std::vector<double> errors;
};

/// Integrates the collocation flow for u and, separately, the gauged flow
/// for v = G(u); returns sup_t ||v - G(u)||_{L^2} over the macro steps.
GaugeEquivalence gauged_flow_equivalence(const SpectralField& u0, const FlowConfig& cfg, double T);

}  // namespace gnls
