// Command-line front end: simulate, pilot, tune-particles, run, diagnose, export.

#include "skinf/config.hpp"
#include "skinf/pipeline.hpp"
#include "skinf/serialize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using nlohmann::json;

namespace {

// Flags that mirror RunConfig keys. Anything set here overrides the config file.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::string> experiment, algorithm, output_dir, pilot;
  std::optional<long long> n, n1, iters, workers;
  std::optional<std::uint64_t> seed, data_seed;
  std::optional<double> burn_in, lambda, tau, dt_max, rtol, d_eff;
  bool density = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON run configuration");
    app->add_option("--experiment", experiment, "built-in name or bundle JSON path");
    app->add_option("--algorithm", algorithm, "pmmh | dapmmh-lna | dapmmh-cle");
    app->add_option("--N", n, "particles for the exact filter");
    app->add_option("--N1", n1, "particles for the CLE surrogate filter");
    app->add_option("--iters", iters, "chain length");
    app->add_option("--burn-in", burn_in, "fraction discarded before summaries");
    app->add_option("--lambda", lambda, "proposal scale");
    app->add_option("--tau", tau, "LNA tempering exponent");
    app->add_option("--dt-max", dt_max, "CLE Euler-Maruyama step bound");
    app->add_option("--rtol", rtol, "LNA ODE relative tolerance");
    app->add_option("--seed", seed, "master seed");
    app->add_option("--data-seed", data_seed, "regenerates synthetic data for built-ins");
    app->add_option("--workers", workers, "particle-filter threads");
    app->add_option("--output-dir,--out", output_dir, "directory for outputs");
    app->add_option("--pilot", pilot, "pilot.json supplying covariance and start");
    app->add_option("--d-eff", d_eff, "divisor in the 2.38^2/d proposal scaling");
    app->add_flag("--density", density, "also write density.csv");
  }

  skinf::RunConfig resolve() const {
    json doc = json::object();
    if (!config_path.empty()) doc = json::parse(skinf::read_text_file(config_path));
    if (!doc.is_object()) throw skinf::ConfigError("config: top level must be an object");
    auto set = [&doc](const char* key, const auto& v) {
      if (v) doc[key] = *v;
    };
    set("experiment", experiment);
    set("algorithm", algorithm);
    set("output_dir", output_dir);
    set("pilot", pilot);
    set("N", n);
    set("N1", n1);
    set("iters", iters);
    set("workers", workers);
    set("seed", seed);
    set("data_seed", data_seed);
    set("burn_in", burn_in);
    set("lambda", lambda);
    set("tau", tau);
    set("dt_max", dt_max);
    set("rtol", rtol);
    set("d_eff", d_eff);
    if (density) doc["density"] = true;
    return skinf::parse_config(doc);
  }
};

std::vector<double> split_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

void emit_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian inference for stochastic kinetic models with delayed-acceptance PMMH"};
  app.require_subcommand(1);

  ConfigFlags run_flags, pilot_flags, tune_flags;
  auto* run_cmd = app.add_subcommand("run", "run a PMMH or delayed-acceptance chain");
  run_flags.attach(run_cmd);
  auto* pilot_cmd = app.add_subcommand("pilot", "short chain to estimate the proposal covariance and start");
  pilot_flags.attach(pilot_cmd);
  auto* tune_cmd = app.add_subcommand("tune-particles", "choose N from the variance of log-likelihood estimates");
  tune_flags.attach(tune_cmd);
  std::string candidates = "50,100,150,200,250";
  int reps = 100;
  tune_cmd->add_option("--candidates", candidates, "comma-separated particle counts");
  tune_cmd->add_option("--reps", reps, "filter runs per candidate");

  auto* sim_cmd = app.add_subcommand("simulate", "forward-simulate trajectories to CSV");
  std::string sim_experiment, sim_method = "ssa", sim_params, sim_out;
  std::optional<std::uint64_t> sim_data_seed;
  double sim_t_end = -1.0, sim_step = 1.0, sim_dt = 0.01;
  int sim_reps = 1;
  std::uint64_t sim_seed = 1;
  sim_cmd->add_option("--experiment", sim_experiment, "built-in name or bundle JSON path")->required();
  sim_cmd->add_option("--method", sim_method, "ssa | cle")->check(CLI::IsMember({"ssa", "cle"}));
  sim_cmd->add_option("--params", sim_params, "comma-separated natural-scale parameters (default: truth or start)");
  sim_cmd->add_option("--t-end", sim_t_end, "end time (default: last observation time)");
  sim_cmd->add_option("--step", sim_step, "output spacing");
  sim_cmd->add_option("--dt-max", sim_dt, "CLE step bound");
  sim_cmd->add_option("--replicates", sim_reps, "number of trajectories");
  sim_cmd->add_option("--seed", sim_seed, "seed")->required();
  sim_cmd->add_option("--data-seed", sim_data_seed, "data seed for built-ins");
  sim_cmd->add_option("--out", sim_out, "output CSV (default: stdout)");

  auto* diag_cmd = app.add_subcommand("diagnose", "ESS and acceptance summaries of an existing run");
  std::string diag_samples, diag_trace;
  diag_cmd->add_option("--samples", diag_samples, "samples.csv")->required();
  diag_cmd->add_option("--trace", diag_trace, "trace.csv");

  auto* export_cmd = app.add_subcommand("export", "write an experiment bundle as JSON");
  std::string exp_experiment, exp_out;
  std::optional<std::uint64_t> exp_data_seed;
  export_cmd->add_option("--experiment", exp_experiment, "built-in name or bundle JSON path")->required();
  export_cmd->add_option("--data-seed", exp_data_seed, "data seed for built-ins");
  export_cmd->add_option("--out", exp_out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return 2;
  }

  try {
    if (run_cmd->parsed()) {
      const auto cfg = run_flags.resolve();
      const auto rep = skinf::run(cfg);
      std::cout << json{{"output_dir", cfg.output_dir},
                        {"alpha1", rep.alpha1},
                        {"alpha2_given_1", rep.alpha2_given_1},
                        {"exact_filter_calls", rep.exact_calls},
                        {"wall_time_seconds", rep.wall_time}}
                       .dump()
                << "\n";
    } else if (pilot_cmd->parsed()) {
      const auto cfg = pilot_flags.resolve();
      const auto s = skinf::run_pilot(cfg);
      std::cout << s.to_json().dump() << "\n";
    } else if (tune_cmd->parsed()) {
      const auto cfg = tune_flags.resolve();
      std::vector<int> ns;
      for (double v : split_numbers(candidates)) ns.push_back(static_cast<int>(v));
      const auto res = skinf::run_tune(cfg, ns, reps);
      if (res.warning) std::cerr << json{{"warning", res.message}}.dump() << "\n";
      std::cout << json{{"chosen_N", res.chosen}}.dump() << "\n";
    } else if (sim_cmd->parsed()) {
      const auto bundle = skinf::load_experiment(sim_experiment, sim_data_seed);
      Eigen::VectorXd params = bundle.true_params.value_or(bundle.initial_params);
      if (!sim_params.empty()) {
        const auto v = split_numbers(sim_params);
        if (static_cast<int>(v.size()) != bundle.dim())
          throw std::invalid_argument("--params needs " + std::to_string(bundle.dim()) + " values");
        params = Eigen::Map<const Eigen::VectorXd>(v.data(), bundle.dim());
      }
      const double t_end = sim_t_end >= 0.0 ? sim_t_end : bundle.data.times.back();
      const auto method = sim_method == "cle" ? skinf::SimMethod::Cle : skinf::SimMethod::Ssa;
      const auto table = skinf::simulate_trajectories(bundle, params, method, t_end, sim_step, sim_reps, sim_seed, sim_dt);
      const std::string csv = skinf::to_csv(table);
      if (sim_out.empty()) std::cout << csv;
      else skinf::write_text_file(sim_out, csv);
    } else if (diag_cmd->parsed()) {
      const auto samples = skinf::parse_csv(skinf::read_text_file(diag_samples));
      std::optional<skinf::CsvTable> trace;
      if (!diag_trace.empty()) trace = skinf::parse_csv(skinf::read_text_file(diag_trace));
      std::cout << skinf::diagnose(samples, trace).dump(2) << "\n";
    } else if (export_cmd->parsed()) {
      const auto bundle = skinf::load_experiment(exp_experiment, exp_data_seed);
      const std::string text = skinf::bundle_to_json(bundle).dump(2) + "\n";
      if (exp_out.empty()) std::cout << text;
      else skinf::write_text_file(exp_out, text);
    }
  } catch (const skinf::ConfigError& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const json::exception& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return 1;
  }
  return 0;
}
