#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gnls/dynamics.hpp"
#include "gnls/gauge.hpp"
#include "gnls/measures.hpp"
#include "gnls/variational.hpp"

namespace gnls {

enum class ExperimentKind { sample, evolve, invariance, moments, variational, gauge_check, truncation };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

/// Schema violation in an experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InitialData {
  enum class Kind { gaussian, modes, snapshot } kind = Kind::gaussian;
  /// (n, coefficient) pairs for Kind::modes.
  std::vector<std::pair<Mode, Complex>> modes;
  std::string path;
};

struct InvarianceSettings {
  double threshold = 3.0;
  bool negative_control = true;
  double control_beta_factor = 2.0;
  int spectrum_modes = 3;
};

struct MomentSettings {
  double p = 1.0;
  double x = 0.0;
};

struct VariationalSettings {
  double K = 1.0;
  double eta = 0.5;
  double dt_sde = 0.0;
  std::vector<int> N_ladder{4, 8, 16};
  std::vector<double> L_ladder{1e1, 1e2, 1e3, 1e4};
  double L = 1e6;
  SdeScheme scheme = SdeScheme::euler_maruyama;
};

struct GaugeSettings {
  std::vector<int> k{1, 2, 3};
  int modes = 4;
  int trials = 100;
  double tolerance = 1e-10;
};

struct TruncationSettings {
  std::vector<int> N_ladder{8, 16, 32};
  int N_ref = 64;
  double s = 0.5;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::sample;
  FlowConfig flow;  // flow.params holds the model
  FlowMode mode = FlowMode::galerkin;
  std::size_t ensemble = 1000;
  std::uint64_t seed = 1;
  SamplingMode sampling = SamplingMode::importance;
  std::optional<double> clip;
  std::vector<std::string> observables{"mass", "hamiltonian", "potential", "hs_norm", "spectrum"};
  InitialData initial;
  std::string output_dir = "out";
  bool write_snapshots = false;
  InvarianceSettings invariance;
  MomentSettings moments;
  VariationalSettings variational;
  GaugeSettings gauge;
  TruncationSettings truncation;

  const ModelParams& model() const { return flow.params; }
};

/// Parses and validates a configuration; unknown keys raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

/// Named observables J, H, V_beta (on Pi_N u), ||u||_{H^s} and |a_n|^2 for
/// n = 0 .. spectrum_modes - 1 (along the first axis).
struct ObservableSuite {
  std::vector<std::string> names;
  double hs_index = 0.5;
  int spectrum_modes = 3;

  static ObservableSuite from_list(const std::vector<std::string>& list, double hs_index,
                                   int spectrum_modes);
  std::vector<double> operator()(const SpectralField& u, const ModelParams& params) const;
};

std::vector<double> observable_suite(const SpectralField& u, const ModelParams& params);

struct ObservableZ {
  std::string name;
  double mean_0 = 0.0;
  double mean_T = 0.0;
  double std_error = 0.0;
  double z = 0.0;
};

struct InvarianceReport {
  std::vector<ObservableZ> observables;
  double max_abs_z = 0.0;
  bool pass = false;
  /// Negative control: reweighting by V_{beta'} with beta' = factor * beta.
  bool control_run = false;
  ObservableZ control;
  bool control_detected = false;
  double mean_mass_drift = 0.0;
  double mean_hamiltonian_drift = 0.0;
  double ess = 0.0;
};

/// Paired weighted comparison of observables at t = 0 and t = T for draws of
/// rho_{alpha,beta,N} evolved by the Galerkin flow.
InvarianceReport invariance_test(const FlowConfig& cfg, double T, std::size_t M, std::uint64_t seed,
                                 const InvarianceSettings& settings = {},
                                 const std::vector<std::string>& observables = {
                                     "mass", "hamiltonian", "potential", "hs_norm", "spectrum"});

struct GaugeCheckReport {
  double max_error = 0.0;
  int trials = 0;
  bool pass = false;
};

/// decomposition_check on random sparse sequences (stream (seed, trial)).
GaugeCheckReport gauge_check(const std::vector<int>& k_list, int modes, int trials, double tolerance,
                             std::uint64_t seed);

/// Random sequence with `modes` distinct frequencies in [-range, range].
CoeffSequence random_sequence(int modes, int range, RngStream& rng);

struct RunResult {
  int exit_code = 0;
  nlohmann::json summary;
  std::vector<std::filesystem::path> files;
};

/// Executes an experiment and writes its artifacts under config.output_dir.
/// Exit code 0 on pass, 2 when a statistical check fails.
RunResult run(const ExperimentConfig& config);

SpectralField initial_field(const ExperimentConfig& config);

}  // namespace gnls
