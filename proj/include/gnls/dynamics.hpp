#pragma once

#include <iosfwd>
#include <vector>

#include "gnls/measures.hpp"
#include "gnls/torus.hpp"

namespace gnls {

/// bracket: omega_n = <n>^alpha; pure: omega_n = |n|^alpha.
enum class DispersionSymbol { bracket, pure };
enum class SplittingScheme { strang, lie };
enum class FlowMode { galerkin, collocation };

struct FlowConfig {
  ModelParams params;
  double dt = 1e-3;
  int nonlinear_substeps = 1;
  double t_final = 1.0;
  DispersionSymbol symbol = DispersionSymbol::bracket;
  SplittingScheme scheme = SplittingScheme::strang;
  /// Store a snapshot every this many macro steps (the last step is always kept).
  int record_every = 1;
  /// Sobolev index of the h_s_norm diagnostic.
  double hs_index = 0.5;
  bool keep_snapshots = true;

  void validate() const;
};

double dispersion(const Mode& n, double alpha, DispersionSymbol symbol);

struct Diagnostics {
  double mass = 0.0;
  double hamiltonian = 0.0;
  double potential = 0.0;
  double hs_norm = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> snapshots;
  std::vector<Diagnostics> diagnostics;

  std::size_t size() const { return times.size(); }
  /// Largest |X(t) - X(0)| / |X(0)| over the recorded times.
  double relative_mass_drift() const;
  double relative_hamiltonian_drift() const;
  /// CSV with header t,mass,hamiltonian,potential,h_s_norm.
  void write_csv(std::ostream& out) const;
};

/// a_n -> e^{-i t omega_n} a_n.
SpectralField linear_substep(const SpectralField& u, double t, const FlowConfig& cfg);

/// Exact flow of i u_t = 2 gamma beta e^{beta |u|^2} u at the grid points.
SpectralField nonlinear_substep_collocation(const SpectralField& u, double t,
                                            const ModelParams& params);

/// Classical RK4 for i a_t = 2 gamma beta Pi_N[e^{beta |Pi_N u|^2} Pi_N u]
/// on |n| <= N; higher modes are returned unchanged.
SpectralField nonlinear_substep_galerkin(const SpectralField& u, double t,
                                         const ModelParams& params, int substeps);

/// One macro step of signed length dt (negative dt runs backwards).
SpectralField flow_step(const SpectralField& u, double dt, const FlowConfig& cfg, FlowMode mode);

/// Conserved energy of the chosen mode: dispersion-weighted kinetic term
/// plus gamma V_beta, with V evaluated on Pi_N u in Galerkin mode.
Diagnostics diagnose(const SpectralField& u, const FlowConfig& cfg, FlowMode mode);

Trajectory evolve(const SpectralField& u0, const FlowConfig& cfg, FlowMode mode);

/// Final state after time t (any sign) with steps of size cfg.dt.
SpectralField evolve_to(const SpectralField& u0, double t, const FlowConfig& cfg, FlowMode mode);

struct LiouvilleResult {
  double determinant = 0.0;
  double deviation = 0.0;
  int dimension = 0;
};

/// Central-difference Jacobian determinant of one Galerkin step with
/// cfg.dt on the real and imaginary parts of a_n, |n| <= N.
LiouvilleResult liouville_check(const FlowConfig& cfg, const SpectralField& probe, double h = 1e-5);

struct TruncationRow {
  int N = 0;
  double error = 0.0;
};

struct TruncationTable {
  std::vector<TruncationRow> rows;
  /// Slope of log error against log N (negative when errors decay).
  double decay_order = 0.0;
  bool monotone = false;
};

/// sup_t ||Pi_N Phi_N(t) u0 - Phi_ref(t) u0||_{H^s} for each N of the
/// ladder, where Phi_N is the Galerkin flow with cutoff N on u0's box.
TruncationTable truncation_convergence(const SpectralField& u0, const FlowConfig& cfg,
                                       const std::vector<int>& N_ladder, int N_ref, double s);

}  // namespace gnls
