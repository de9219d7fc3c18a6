#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gnls/harness.hpp"

using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::optional<int> N;
  std::optional<double> alpha, beta;
  std::optional<std::size_t> ensemble;
  bool dry_run = false;
};

struct FlowFlags {
  std::optional<std::string> mode, symbol;
  std::optional<double> dt, t_final, oversample;
};

struct GaugeFlags {
  std::optional<std::vector<int>> k;
  std::optional<int> modes, trials;
  std::optional<double> tolerance;
};

struct VariationalFlags {
  std::optional<double> gamma, K, eta, dt_sde;
  std::optional<std::vector<int>> N_ladder;
  std::optional<std::vector<double>> L_ladder;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON configuration file");
  app->add_option("--seed", c.seed, "Master seed");
  app->add_option("--threads", c.threads, "Worker threads (GNLS_THREADS takes precedence)")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--N", c.N, "Truncation parameter N");
  app->add_option("--alpha", c.alpha, "Dispersion exponent");
  app->add_option("--beta", c.beta, "Potential parameter");
  app->add_option("--ensemble", c.ensemble, "Ensemble size M");
  app->add_flag("--dry-run", c.dry_run, "Print the resolved configuration and exit");
}

void add_flow(CLI::App* app, FlowFlags& f) {
  app->add_option("--mode", f.mode, "galerkin | collocation")->check(CLI::IsMember({"galerkin", "collocation"}));
  app->add_option("--symbol", f.symbol, "bracket | pure")->check(CLI::IsMember({"bracket", "pure"}));
  app->add_option("--dt", f.dt, "Time step");
  app->add_option("--t-final", f.t_final, "Final time");
  app->add_option("--oversample", f.oversample, "Grid oversampling factor");
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw gnls::ConfigError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw gnls::ConfigError(path + ": " + e.what());
  }
}

template <class T>
void set(json& j, const std::string& key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

json resolve(const std::string& kind, const Common& c, const FlowFlags& f, const GaugeFlags& g,
             const VariationalFlags& v) {
  json j = load_config(c.config);
  if (!j.is_object()) throw gnls::ConfigError("config root must be an object");
  if (j.contains("kind") && j["kind"] != kind)
    throw gnls::ConfigError("config kind '" + j["kind"].dump() + "' does not match subcommand '" + kind + "'");
  j["kind"] = kind;
  set(j, "seed", c.seed);
  set(j, "ensemble", c.ensemble);
  if (c.out) j["output"]["dir"] = *c.out;
  set(j["model"], "N", c.N);
  set(j["model"], "alpha", c.alpha);
  set(j["model"], "beta", c.beta);
  set(j["model"], "oversampling", f.oversample);
  set(j["model"], "gamma", v.gamma);
  set(j["flow"], "mode", f.mode);
  set(j["flow"], "symbol", f.symbol);
  set(j["flow"], "dt", f.dt);
  set(j["flow"], "t_final", f.t_final);
  set(j["gauge"], "k", g.k);
  set(j["gauge"], "modes", g.modes);
  set(j["gauge"], "trials", g.trials);
  set(j["gauge"], "tolerance", g.tolerance);
  set(j["variational"], "K", v.K);
  set(j["variational"], "eta", v.eta);
  set(j["variational"], "dt_sde", v.dt_sde);
  set(j["variational"], "L_ladder", v.L_ladder);
  if (v.N_ladder) j[kind == "truncation" ? "truncation" : "variational"]["N_ladder"] = *v.N_ladder;
  for (const char* section : {"model", "flow", "gauge", "variational", "truncation"})
    if (j.contains(section) && j[section].is_null()) j.erase(section);
  return j;
}

void configure_threads(const std::optional<int>& flag) {
  if (const char* env = std::getenv("GNLS_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) {
        omp_set_num_threads(n);
        return;
      }
    } catch (const std::exception&) {
    }
    std::cerr << "gnls: ignoring invalid GNLS_THREADS=" << env << "\n";
  }
  if (flag) omp_set_num_threads(*flag);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gibbs measure and NLS flow experiments on the torus"};
  app.require_subcommand(1);

  Common common;
  FlowFlags flow;
  GaugeFlags gauge;
  VariationalFlags var;

  const std::vector<std::string> kinds{"sample", "evolve", "invariance", "moments",
                                       "variational", "gauge-check", "truncation"};
  for (const auto& kind : kinds) {
    CLI::App* sub = app.add_subcommand(kind);
    add_common(sub, common);
    if (kind == "evolve" || kind == "invariance" || kind == "truncation") add_flow(sub, flow);
    if (kind == "gauge-check") {
      sub->add_option("--k", gauge.k, "Nonlinearity degrees")->delimiter(',');
      sub->add_option("--modes", gauge.modes, "Nonzero modes per random sequence");
      sub->add_option("--trials", gauge.trials, "Random trials");
      sub->add_option("--tolerance", gauge.tolerance, "Relative error tolerance");
    }
    if (kind == "variational") {
      sub->add_option("--gamma", var.gamma, "Coupling sign and size");
      sub->add_option("--K", var.K, "Mass cutoff");
      sub->add_option("--eta", var.eta, "Bump amplitude");
      sub->add_option("--L-ladder", var.L_ladder, "Potential clip ladder")->delimiter(',');
      sub->add_option("--dt-sde", var.dt_sde, "SDE step");
    }
    if (kind == "variational" || kind == "truncation")
      sub->add_option("--N-ladder", var.N_ladder, "Truncation ladder")->delimiter(',');
  }

  CLI11_PARSE(app, argc, argv);
  const std::string kind = app.get_subcommands().front()->get_name();

  try {
    const gnls::ExperimentConfig config = gnls::parse_config(resolve(kind, common, flow, gauge, var));
    if (common.dry_run) {
      std::cout << gnls::to_json(config).dump(2) << "\n";
      return 0;
    }
    configure_threads(common.threads);
    const gnls::RunResult result = gnls::run(config);
    std::cout << result.summary.dump(2) << "\n";
    for (const auto& f : result.files) std::cerr << "wrote " << f.string() << "\n";
    return result.exit_code;
  } catch (const gnls::ConfigError& e) {
    std::cerr << "gnls: invalid configuration: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "gnls: " << e.what() << "\n";
    return 1;
  }
}
