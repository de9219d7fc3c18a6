#include "gnls/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

namespace gnls {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Enumerations

namespace {

const std::vector<std::pair<ExperimentKind, std::string>> kKinds = {
    {ExperimentKind::sample, "sample"},           {ExperimentKind::evolve, "evolve"},
    {ExperimentKind::invariance, "invariance"},   {ExperimentKind::moments, "moments"},
    {ExperimentKind::variational, "variational"}, {ExperimentKind::gauge_check, "gauge-check"},
    {ExperimentKind::truncation, "truncation"}};

template <class E>
E parse_enum(const std::string& s, const std::vector<std::pair<E, std::string>>& table,
             const std::string& what) {
  for (const auto& [e, name] : table)
    if (name == s) return e;
  std::string options;
  for (const auto& [e, name] : table) options += (options.empty() ? "" : "|") + name;
  throw ConfigError(what + ": expected one of " + options + ", got '" + s + "'");
}

template <class E>
std::string enum_name(E e, const std::vector<std::pair<E, std::string>>& table) {
  for (const auto& [v, name] : table)
    if (v == e) return name;
  return "?";
}

const std::vector<std::pair<DispersionSymbol, std::string>> kSymbols = {
    {DispersionSymbol::bracket, "bracket"}, {DispersionSymbol::pure, "pure"}};
const std::vector<std::pair<SplittingScheme, std::string>> kSchemes = {
    {SplittingScheme::strang, "strang"}, {SplittingScheme::lie, "lie"}};
const std::vector<std::pair<FlowMode, std::string>> kModes = {
    {FlowMode::galerkin, "galerkin"}, {FlowMode::collocation, "collocation"}};
const std::vector<std::pair<SamplingMode, std::string>> kSampling = {
    {SamplingMode::importance, "importance"}, {SamplingMode::rejection, "rejection"}};
const std::vector<std::pair<SdeScheme, std::string>> kSde = {
    {SdeScheme::euler_maruyama, "euler-maruyama"}, {SdeScheme::exact, "exact"}};

}  // namespace

std::string to_string(ExperimentKind kind) { return enum_name(kind, kKinds); }

ExperimentKind parse_kind(const std::string& name) { return parse_enum(name, kKinds, "kind"); }

// ---------------------------------------------------------------------------
// Strict JSON reading

namespace {

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <class T>
  bool get(const std::string& key, T& out) {
    allowed_.insert(key);
    if (!j_.contains(key)) return false;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
    return true;
  }

  template <class E>
  void get_enum(const std::string& key, E& out, const std::vector<std::pair<E, std::string>>& table) {
    std::string s;
    if (get(key, s)) out = parse_enum(s, table, where(key));
  }

  const json* child(const std::string& key) {
    allowed_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!allowed_.count(item.key())) throw ConfigError(where(item.key()) + ": unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> allowed_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  ObjectReader root(j, "");
  std::string kind;
  require(root.get("kind", kind), "config.kind: required");
  c.kind = parse_kind(kind);
  root.get("seed", c.seed);
  root.get("ensemble", c.ensemble);
  root.get_enum("sampling", c.sampling, kSampling);
  double clip = 0;
  if (root.get("clip", clip)) c.clip = clip;
  root.get("observables", c.observables);

  ModelParams& m = c.flow.params;
  if (const json* mj = root.child("model")) {
    ObjectReader r(*mj, "model");
    r.get("dim", m.dim);
    r.get("alpha", m.alpha);
    r.get("beta", m.beta);
    r.get("gamma", m.gamma);
    r.get("N", m.N);
    r.get("oversampling", m.oversampling);
    r.finish();
  }
  if (const json* fj = root.child("flow")) {
    ObjectReader r(*fj, "flow");
    r.get("dt", c.flow.dt);
    r.get("t_final", c.flow.t_final);
    r.get("nonlinear_substeps", c.flow.nonlinear_substeps);
    r.get_enum("symbol", c.flow.symbol, kSymbols);
    r.get_enum("scheme", c.flow.scheme, kSchemes);
    r.get_enum("mode", c.mode, kModes);
    r.get("record_every", c.flow.record_every);
    r.get("hs_index", c.flow.hs_index);
    r.finish();
  }
  if (const json* ij = root.child("initial")) {
    ObjectReader r(*ij, "initial");
    std::string k = "gaussian";
    r.get("kind", k);
    if (k == "gaussian") {
      c.initial.kind = InitialData::Kind::gaussian;
    } else if (k == "modes") {
      c.initial.kind = InitialData::Kind::modes;
      std::vector<std::vector<double>> rows;
      require(r.get("coefficients", rows), "initial.coefficients: required for kind 'modes'");
      for (const auto& row : rows) {
        if (row.size() == 3)
          c.initial.modes.push_back({{int(row[0]), 0}, {row[1], row[2]}});
        else if (row.size() == 4)
          c.initial.modes.push_back({{int(row[0]), int(row[1])}, {row[2], row[3]}});
        else
          throw ConfigError("initial.coefficients: rows are [n, re, im] or [n1, n2, re, im]");
      }
    } else if (k == "snapshot") {
      c.initial.kind = InitialData::Kind::snapshot;
      require(r.get("path", c.initial.path), "initial.path: required for kind 'snapshot'");
    } else {
      throw ConfigError("initial.kind: expected gaussian|modes|snapshot");
    }
    r.finish();
  }
  if (const json* oj = root.child("output")) {
    ObjectReader r(*oj, "output");
    r.get("dir", c.output_dir);
    r.get("snapshots", c.write_snapshots);
    r.finish();
  }
  if (const json* sj = root.child("invariance")) {
    ObjectReader r(*sj, "invariance");
    r.get("threshold", c.invariance.threshold);
    r.get("negative_control", c.invariance.negative_control);
    r.get("control_beta_factor", c.invariance.control_beta_factor);
    r.get("spectrum_modes", c.invariance.spectrum_modes);
    r.finish();
  }
  if (const json* sj = root.child("moments")) {
    ObjectReader r(*sj, "moments");
    r.get("p", c.moments.p);
    r.get("x", c.moments.x);
    r.finish();
  }
  if (const json* sj = root.child("variational")) {
    ObjectReader r(*sj, "variational");
    r.get("K", c.variational.K);
    r.get("eta", c.variational.eta);
    r.get("dt_sde", c.variational.dt_sde);
    r.get("N_ladder", c.variational.N_ladder);
    r.get("L_ladder", c.variational.L_ladder);
    r.get("L", c.variational.L);
    r.get_enum("scheme", c.variational.scheme, kSde);
    r.finish();
  }
  if (const json* sj = root.child("gauge")) {
    ObjectReader r(*sj, "gauge");
    if (const json* kj = r.child("k")) {
      try {
        c.gauge.k = kj->is_array() ? kj->get<std::vector<int>>() : std::vector<int>{kj->get<int>()};
      } catch (const json::exception& e) {
        throw ConfigError(std::string("gauge.k: ") + e.what());
      }
    }
    r.get("modes", c.gauge.modes);
    r.get("trials", c.gauge.trials);
    r.get("tolerance", c.gauge.tolerance);
    r.finish();
  }
  if (const json* sj = root.child("truncation")) {
    ObjectReader r(*sj, "truncation");
    r.get("N_ladder", c.truncation.N_ladder);
    r.get("N_ref", c.truncation.N_ref);
    r.get("s", c.truncation.s);
    r.finish();
  }
  root.finish();

  try {
    c.flow.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  require(c.ensemble > 0, "ensemble: must be > 0");
  static const std::set<std::string> known = {"mass", "hamiltonian", "potential", "hs_norm", "spectrum"};
  for (const auto& o : c.observables)
    require(known.count(o) > 0, "observables: unknown observable '" + o + "'");
  require(c.invariance.spectrum_modes >= 0, "invariance.spectrum_modes: must be >= 0");
  require(c.gauge.modes >= 1 && c.gauge.trials >= 1, "gauge: modes and trials must be >= 1");
  for (int k : c.gauge.k) require(k >= 1, "gauge.k: orders must be >= 1");
  require(!c.truncation.N_ladder.empty(), "truncation.N_ladder: must not be empty");
  for (int N : c.truncation.N_ladder)
    require(N >= 0 && N <= c.truncation.N_ref, "truncation.N_ladder: entries must lie in [0, N_ref]");
  require(!c.variational.N_ladder.empty(), "variational.N_ladder: must not be empty");
  require(c.variational.L_ladder.size() >= 2, "variational.L_ladder: need >= 2 entries");
  return c;
}

json to_json(const ExperimentConfig& c) {
  const auto& m = c.model();
  json j;
  j["kind"] = to_string(c.kind);
  j["seed"] = c.seed;
  j["ensemble"] = c.ensemble;
  j["sampling"] = enum_name(c.sampling, kSampling);
  if (c.clip) j["clip"] = *c.clip;
  j["observables"] = c.observables;
  j["model"] = {{"dim", m.dim},     {"alpha", m.alpha}, {"beta", m.beta},
                {"gamma", m.gamma}, {"N", m.N},         {"oversampling", m.oversampling}};
  j["flow"] = {{"dt", c.flow.dt},
               {"t_final", c.flow.t_final},
               {"nonlinear_substeps", c.flow.nonlinear_substeps},
               {"symbol", enum_name(c.flow.symbol, kSymbols)},
               {"scheme", enum_name(c.flow.scheme, kSchemes)},
               {"mode", enum_name(c.mode, kModes)},
               {"record_every", c.flow.record_every},
               {"hs_index", c.flow.hs_index}};
  json init;
  switch (c.initial.kind) {
    case InitialData::Kind::gaussian: init["kind"] = "gaussian"; break;
    case InitialData::Kind::modes: {
      init["kind"] = "modes";
      json rows = json::array();
      for (const auto& [n, a] : c.initial.modes)
        rows.push_back(m.dim == 1 ? json{n[0], a.real(), a.imag()} : json{n[0], n[1], a.real(), a.imag()});
      init["coefficients"] = rows;
      break;
    }
    case InitialData::Kind::snapshot:
      init["kind"] = "snapshot";
      init["path"] = c.initial.path;
      break;
  }
  j["initial"] = init;
  j["output"] = {{"dir", c.output_dir}, {"snapshots", c.write_snapshots}};
  j["invariance"] = {{"threshold", c.invariance.threshold},
                     {"negative_control", c.invariance.negative_control},
                     {"control_beta_factor", c.invariance.control_beta_factor},
                     {"spectrum_modes", c.invariance.spectrum_modes}};
  j["moments"] = {{"p", c.moments.p}, {"x", c.moments.x}};
  j["variational"] = {{"K", c.variational.K},
                      {"eta", c.variational.eta},
                      {"dt_sde", c.variational.dt_sde},
                      {"N_ladder", c.variational.N_ladder},
                      {"L_ladder", c.variational.L_ladder},
                      {"L", c.variational.L},
                      {"scheme", enum_name(c.variational.scheme, kSde)}};
  j["gauge"] = {{"k", c.gauge.k},
                {"modes", c.gauge.modes},
                {"trials", c.gauge.trials},
                {"tolerance", c.gauge.tolerance}};
  j["truncation"] = {{"N_ladder", c.truncation.N_ladder},
                     {"N_ref", c.truncation.N_ref},
                     {"s", c.truncation.s}};
  return j;
}

// ---------------------------------------------------------------------------
// Observables

ObservableSuite ObservableSuite::from_list(const std::vector<std::string>& list, double hs_index,
                                           int spectrum_modes) {
  ObservableSuite s;
  s.hs_index = hs_index;
  s.spectrum_modes = spectrum_modes;
  for (const auto& name : list) {
    if (name == "spectrum") {
      for (int n = 0; n < spectrum_modes; ++n) s.names.push_back("spec_" + std::to_string(n));
    } else if (name == "mass" || name == "hamiltonian" || name == "potential" || name == "hs_norm") {
      s.names.push_back(name);
    } else {
      throw std::invalid_argument("ObservableSuite: unknown observable '" + name + "'");
    }
  }
  return s;
}

std::vector<double> ObservableSuite::operator()(const SpectralField& u, const ModelParams& params) const {
  std::vector<double> out;
  out.reserve(names.size());
  std::optional<double> v;
  auto pot = [&] {
    if (!v) v = potential(project(u, params.N), params.beta);
    return *v;
  };
  for (const auto& name : names) {
    if (name == "mass") {
      out.push_back(mass(u));
    } else if (name == "hamiltonian") {
      out.push_back(kinetic_energy(u, params.alpha) + params.gamma * pot());
    } else if (name == "potential") {
      out.push_back(pot());
    } else if (name == "hs_norm") {
      out.push_back(sobolev_norm(u, hs_index));
    } else {
      const int n = std::stoi(name.substr(5));
      const Mode m{n, 0};
      out.push_back(u.geometry().contains(m) ? std::norm(u[m]) : 0.0);
    }
  }
  return out;
}

std::vector<double> observable_suite(const SpectralField& u, const ModelParams& params) {
  static const ObservableSuite suite = ObservableSuite::from_list(
      {"mass", "hamiltonian", "potential", "hs_norm", "spectrum"}, 0.5, 3);
  return suite(u, params);
}

// ---------------------------------------------------------------------------
// Invariance

namespace {

ObservableZ paired_z(const std::string& name, const std::vector<double>& o0, const std::vector<double>& oT,
                     const std::vector<double>& w) {
  const std::size_t M = w.size();
  std::vector<double> diff(M);
  for (std::size_t i = 0; i < M; ++i) diff[i] = oT[i] - o0[i];
  ObservableZ z;
  z.name = name;
  z.mean_0 = weighted_estimate(o0, w).estimate;
  z.mean_T = weighted_estimate(oT, w).estimate;
  const auto d = weighted_estimate(diff, w);
  z.std_error = d.std_error;
  // Roundoff floor keeps z finite for exactly conserved observables.
  const double floor = 1e-10 * std::max(std::abs(z.mean_0), 1e-300);
  z.z = d.estimate / std::sqrt(d.std_error * d.std_error + floor * floor);
  return z;
}

}  // namespace

InvarianceReport invariance_test(const FlowConfig& cfg, double T, std::size_t M, std::uint64_t seed,
                                 const InvarianceSettings& settings,
                                 const std::vector<std::string>& observables) {
  cfg.validate();
  const ModelParams& p = cfg.params;
  if (!(p.gamma > 0)) throw std::invalid_argument("invariance_test: gamma must be > 0");
  if (M < 2) throw std::invalid_argument("invariance_test: M must be >= 2");
  if (cfg.symbol != DispersionSymbol::bracket)
    std::cerr << "warning: invariance_test with the pure symbol does not match the measure\n";
  const ObservableSuite suite = ObservableSuite::from_list(observables, cfg.hs_index, settings.spectrum_modes);
  const std::size_t K = suite.names.size();
  const bool control = settings.negative_control && p.beta > 0;
  const double beta_c = settings.control_beta_factor * p.beta;

  std::vector<std::vector<double>> o0(K, std::vector<double>(M)), oT(K, std::vector<double>(M));
  std::vector<double> w(M), wc(M), v0(M), vT(M), dmass(M), dham(M);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < M; ++i) {
    RngStream rng(seed, i);
    const SpectralField u0 = sample_gaussian(p, rng);
    const SpectralField uT = evolve_to(u0, T, cfg, FlowMode::galerkin);
    const auto a = suite(u0, p);
    const auto b = suite(uT, p);
    for (std::size_t k = 0; k < K; ++k) {
      o0[k][i] = a[k];
      oT[k][i] = b[k];
    }
    const double V0 = potential(project(u0, p.N), p.beta);
    w[i] = std::exp(-p.gamma * V0);
    v0[i] = V0;
    vT[i] = potential(project(uT, p.N), p.beta);
    if (control) wc[i] = std::exp(-p.gamma * potential(project(u0, p.N), beta_c));
    const double m0 = mass(u0);
    dmass[i] = m0 > 0 ? std::abs(mass(uT) - m0) / m0 : 0.0;
    const double h0 = truncated_hamiltonian(u0, p);
    dham[i] = std::abs(truncated_hamiltonian(uT, p) - h0) / std::abs(h0);
  }

  InvarianceReport r;
  for (std::size_t k = 0; k < K; ++k) {
    r.observables.push_back(paired_z(suite.names[k], o0[k], oT[k], w));
    r.max_abs_z = std::max(r.max_abs_z, std::abs(r.observables.back().z));
  }
  r.pass = r.max_abs_z <= settings.threshold;
  r.ess = kish_ess(w);
  r.mean_mass_drift = mean_estimate(dmass).mean;
  r.mean_hamiltonian_drift = mean_estimate(dham).mean;
  if (control) {
    r.control_run = true;
    r.control = paired_z("potential", v0, vT, wc);
    r.control_detected = std::abs(r.control.z) > settings.threshold;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Gauge check

CoeffSequence random_sequence(int modes, int range, RngStream& rng) {
  if (modes < 1 || modes > 2 * range + 1)
    throw std::invalid_argument("random_sequence: need 1 <= modes <= 2 range + 1");
  std::vector<int> pool(2 * range + 1);
  std::iota(pool.begin(), pool.end(), -range);
  CoeffSequence c(range);
  for (int j = 0; j < modes; ++j) {
    const auto pick = j + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(pool.size() - j));
    std::swap(pool[j], pool[pick]);
    c.at(pool[j]) = rng.complex_normal();
  }
  return c;
}

GaugeCheckReport gauge_check(const std::vector<int>& k_list, int modes, int trials, double tolerance,
                             std::uint64_t seed) {
  GaugeCheckReport r;
  r.trials = trials;
  std::vector<double> worst(trials, 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (int t = 0; t < trials; ++t) {
    RngStream rng(seed, static_cast<std::uint64_t>(t));
    const CoeffSequence v = random_sequence(modes, std::max(modes, 3), rng);
    for (int k : k_list) worst[t] = std::max(worst[t], decomposition_check(k, v).relative_error);
  }
  for (double e : worst) r.max_error = std::max(r.max_error, e);
  r.pass = r.max_error <= tolerance;
  return r;
}

// ---------------------------------------------------------------------------
// Runner

SpectralField initial_field(const ExperimentConfig& config) {
  const ModelParams& p = config.model();
  switch (config.initial.kind) {
    case InitialData::Kind::gaussian: {
      RngStream rng(config.seed, 0);
      return sample_gaussian(p, rng);
    }
    case InitialData::Kind::modes: {
      SpectralField u(p.geometry());
      for (const auto& [n, a] : config.initial.modes) {
        if (!u.geometry().contains(n)) throw ConfigError("initial.coefficients: mode outside |n|_inf <= N");
        u[n] = a;
      }
      return u;
    }
    case InitialData::Kind::snapshot: {
      std::ifstream in(config.initial.path, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open snapshot '" + config.initial.path + "'");
      return read_snapshot(in, p.oversampling);
    }
  }
  throw std::logic_error("initial_field: unreachable");
}

namespace {

class Writer {
 public:
  explicit Writer(const std::filesystem::path& dir) : dir_(dir) { std::filesystem::create_directories(dir); }

  std::ofstream open(const std::string& name, RunResult& result, bool binary = false) {
    const auto path = dir_ / name;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << std::setprecision(17);
    result.files.push_back(path);
    return out;
  }

  void json_file(const std::string& name, const json& j, RunResult& result) {
    auto out = open(name, result);
    out << j.dump(2) << '\n';
  }

 private:
  std::filesystem::path dir_;
};

json report_json(const EnsembleReport& r) {
  json obs = json::object();
  for (const auto& o : r.observables)
    obs[o.name] = {{"estimate", o.estimate}, {"stderr", o.std_error}, {"ess", o.ess}};
  return obs;
}

json z_json(const ObservableZ& z) {
  return {{"observable", z.name}, {"mean_0", z.mean_0}, {"mean_T", z.mean_T},
          {"stderr", z.std_error}, {"z", z.z}};
}

RunResult run_sample(const ExperimentConfig& c, Writer& w) {
  RunResult res;
  const ModelParams& p = c.model();
  const GibbsEnsemble ens = gibbs_ensemble(p, c.ensemble, c.seed, c.sampling, c.clip);
  const ObservableSuite suite =
      ObservableSuite::from_list({"mass", "potential", "hamiltonian", "hs_norm"}, c.flow.hs_index, 0);
  const ObservableSuite extra = ObservableSuite::from_list({"spectrum"}, c.flow.hs_index,
                                                           c.invariance.spectrum_modes);
  std::vector<std::string> names = suite.names;
  names.insert(names.end(), extra.names.begin(), extra.names.end());
  std::vector<std::vector<double>> cols(names.size(), std::vector<double>(ens.samples.size()));
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < ens.samples.size(); ++i) {
    auto a = suite(ens.samples[i], p);
    const auto b = extra(ens.samples[i], p);
    a.insert(a.end(), b.begin(), b.end());
    for (std::size_t k = 0; k < a.size(); ++k) cols[k][i] = a[k];
  }
  auto csv = w.open("ensemble.csv", res);
  csv << "sample_id,weight";
  for (const auto& n : names) csv << ',' << n;
  csv << '\n';
  for (std::size_t i = 0; i < ens.samples.size(); ++i) {
    csv << ens.sample_ids[i] << ',' << ens.weights[i];
    for (const auto& col : cols) csv << ',' << col[i];
    csv << '\n';
  }
  const EnsembleReport rep = summarize(names, cols, ens.weights);
  res.summary = {{"kind", "sample"},
                 {"ensemble_size", rep.ensemble_size},
                 {"proposals", ens.proposals},
                 {"partition", ens.partition},
                 {"partition_stderr", ens.partition_stderr},
                 {"max_weight_fraction", rep.max_weight_fraction},
                 {"observables", report_json(rep)}};
  w.json_file("summary.json", res.summary, res);
  return res;
}

RunResult run_evolve(const ExperimentConfig& c, Writer& w) {
  RunResult res;
  FlowConfig cfg = c.flow;
  cfg.keep_snapshots = c.write_snapshots;
  const Trajectory tr = evolve(initial_field(c), cfg, c.mode);
  {
    auto csv = w.open("trajectory.csv", res);
    tr.write_csv(csv);
  }
  if (c.write_snapshots) {
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
      std::ostringstream name;
      name << "snapshots/snapshot_" << std::setw(6) << std::setfill('0') << i << ".gnls";
      auto out = w.open(name.str(), res, true);
      write_snapshot(out, tr.snapshots[i]);
    }
  }
  res.summary = {{"kind", "evolve"},
                 {"records", tr.size()},
                 {"relative_mass_drift", tr.relative_mass_drift()},
                 {"relative_hamiltonian_drift", tr.relative_hamiltonian_drift()}};
  w.json_file("summary.json", res.summary, res);
  return res;
}

RunResult run_invariance(const ExperimentConfig& c, Writer& w) {
  RunResult res;
  const InvarianceReport r =
      invariance_test(c.flow, c.flow.t_final, c.ensemble, c.seed, c.invariance, c.observables);
  {
    auto csv = w.open("invariance.csv", res);
    csv << "observable,mean_0,mean_T,stderr,z\n";
    for (const auto& z : r.observables)
      csv << z.name << ',' << z.mean_0 << ',' << z.mean_T << ',' << z.std_error << ',' << z.z << '\n';
  }
  json obs = json::array();
  for (const auto& z : r.observables) obs.push_back(z_json(z));
  res.summary = {{"kind", "invariance"},
                 {"observables", obs},
                 {"max_abs_z", r.max_abs_z},
                 {"threshold", c.invariance.threshold},
                 {"pass", r.pass},
                 {"ess", r.ess},
                 {"mean_relative_mass_drift", r.mean_mass_drift},
                 {"mean_relative_hamiltonian_drift", r.mean_hamiltonian_drift}};
  if (r.control_run)
    res.summary["negative_control"] = {{"result", z_json(r.control)},
                                       {"beta_factor", c.invariance.control_beta_factor},
                                       {"detected", r.control_detected}};
  else
    res.summary["negative_control"] = nullptr;
  w.json_file("invariance.json", res.summary, res);
  const bool ok = r.pass && (!r.control_run || r.control_detected);
  res.exit_code = ok ? 0 : 2;
  return res;
}

RunResult run_moments(const ExperimentConfig& c, Writer& w) {
  RunResult res;
  const double oracle = exp_moment_oracle(c.model(), c.moments.p);
  const auto mc = exp_moment_mc(c.model(), c.moments.p, c.ensemble, c.seed, c.moments.x);
  const double z = mc.std_error > 0 ? (mc.mean - oracle) / mc.std_error : 0.0;
  const bool pass = std::abs(z) <= 3.0;
  res.summary = {{"kind", "moments"},
                 {"sigma", sigma(c.model().alpha, c.model().N, c.model().dim)},
                 {"oracle", oracle},
                 {"estimate", mc.mean},
                 {"stderr", mc.std_error},
                 {"z", z},
                 {"pass", pass}};
  w.json_file("moments.json", res.summary, res);
  res.exit_code = pass ? 0 : 2;
  return res;
}

RunResult run_variational(const ExperimentConfig& c, Writer& w) {
  RunResult res;
  const auto& v = c.variational;
  {
    auto csv = w.open("objective.csv", res);
    csv << "N,estimate,stderr,indicator_frequency,mean_cost\n";
    for (int N : v.N_ladder) {
      VariationalConfig vc;
      vc.params = c.model();
      vc.params.N = N;
      vc.K = v.K;
      vc.L = v.L;
      vc.eta = v.eta;
      vc.dt_sde = v.dt_sde;
      vc.M = c.ensemble;
      vc.scheme = v.scheme;
      const ObjectiveReport r = objective_estimate(vc, c.seed);
      csv << N << ',' << r.estimate << ',' << r.std_error << ',' << r.indicator_frequency << ','
          << r.mean_cost << '\n';
    }
  }
  const DivergenceScan scan = divergence_scan(c.model(), v.K, v.L_ladder, c.ensemble, c.seed);
  {
    auto csv = w.open("divergence.csv", res);
    csv << "L,estimate,stderr\n";
    for (const auto& row : scan.rows) csv << row.L << ',' << row.estimate << ',' << row.std_error << '\n';
  }
  const bool diverging = scan.strictly_increasing && scan.trend_pvalue < 0.01;
  res.summary = {{"kind", "variational"},
                 {"diverging", diverging},
                 {"trend_pvalue", scan.trend_pvalue},
                 {"strictly_increasing", scan.strictly_increasing},
                 {"saturated", scan.saturated}};
  w.json_file("verdict.json", res.summary, res);
  return res;
}

RunResult run_gauge(const ExperimentConfig& c, Writer& w) {
  RunResult res;
  const auto r = gauge_check(c.gauge.k, c.gauge.modes, c.gauge.trials, c.gauge.tolerance, c.seed);
  res.summary = {{"max_error", r.max_error}, {"trials", r.trials}, {"pass", r.pass}};
  w.json_file("gauge.json", res.summary, res);
  res.exit_code = r.pass ? 0 : 2;
  return res;
}

RunResult run_truncation(const ExperimentConfig& c, Writer& w) {
  RunResult res;
  const auto& t = c.truncation;
  ExperimentConfig big = c;
  big.flow.params.N = t.N_ref;
  SpectralField u0 = initial_field(big);
  const TruncationTable table = truncation_convergence(u0, c.flow, t.N_ladder, t.N_ref, t.s);
  {
    auto csv = w.open("truncation.csv", res);
    csv << "N,error\n";
    for (const auto& row : table.rows) csv << row.N << ',' << row.error << '\n';
  }
  res.summary = {{"kind", "truncation"}, {"decay_order", table.decay_order}, {"monotone", table.monotone}};
  w.json_file("summary.json", res.summary, res);
  res.exit_code = table.monotone ? 0 : 2;
  return res;
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  Writer w(config.output_dir);
  switch (config.kind) {
    case ExperimentKind::sample: return run_sample(config, w);
    case ExperimentKind::evolve: return run_evolve(config, w);
    case ExperimentKind::invariance: return run_invariance(config, w);
    case ExperimentKind::moments: return run_moments(config, w);
    case ExperimentKind::variational: return run_variational(config, w);
    case ExperimentKind::gauge_check: return run_gauge(config, w);
    case ExperimentKind::truncation: return run_truncation(config, w);
  }
  throw std::logic_error("run: unknown kind");
}

}  // namespace gnls
