#pragma once

#include "skinf/config.hpp"
#include "skinf/estimators.hpp"
#include "skinf/mcmc.hpp"
#include "skinf/models.hpp"
#include "skinf/serialize.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace skinf {

/// Built-in name, or a path to a bundle JSON file.
ExperimentBundle load_experiment(const std::string& experiment, std::optional<std::uint64_t> data_seed = std::nullopt);

/// Output of a pilot chain: where the main chain should start and the
/// empirical covariance its proposal is scaled from.
struct PilotSummary {
  std::vector<std::string> param_names;
  Eigen::VectorXd mean_log_params;
  Eigen::MatrixXd covariance;
  long iterations = 0;
  int num_particles = 0;
  double alpha1 = 0.0;

  nlohmann::json to_json() const;
  static PilotSummary from_json(const nlohmann::json& j);
};

PilotSummary summarize_pilot(const RunReport& report, const std::vector<std::string>& names, int num_particles);

/// The fully resolved pieces of a run, after defaults have been applied.
struct ResolvedRun {
  int num_particles = 0;
  int surrogate_particles = 0;
  double lambda = 1.0;
  double d_eff = 3.0;
  ProposalSpec proposal;
  Eigen::VectorXd init;
};

ResolvedRun resolve(const RunConfig& cfg, const ExperimentBundle& bundle);

/// Runs the configured chain in memory.
RunReport execute(const RunConfig& cfg, const ExperimentBundle& bundle);

nlohmann::json report_json(const RunReport& report, const RunConfig& cfg, const ExperimentBundle& bundle,
                           const ResolvedRun& resolved);

/// samples.csv (post-burn-in, log scale), trace.csv, report.json and,
/// when requested, density.csv under cfg.output_dir.
void write_outputs(const RunConfig& cfg, const ExperimentBundle& bundle, const RunReport& report);

/// load_experiment + execute + write_outputs.
RunReport run(const RunConfig& cfg);

/// Runs the configured chain as a pilot and writes pilot.json alongside the
/// usual outputs.
PilotSummary run_pilot(const RunConfig& cfg);

/// Pilot tuning of N at the pilot mean (or the configured starting point),
/// written to tune.json.
ParticleTuneResult run_tune(const RunConfig& cfg, const std::vector<int>& candidates, int reps);

enum class SimMethod { Ssa, Cle };

/// Forward trajectories on [t0, t_end] sampled at a fixed step: columns
/// time, replicate, species...
CsvTable simulate_trajectories(const ExperimentBundle& bundle, const Eigen::VectorXd& params, SimMethod method,
                               double t_end, double step, int replicates, std::uint64_t seed, double dt_max = 0.01);

/// ESS and posterior summaries from a samples.csv; acceptance rates from an
/// optional trace.csv.
nlohmann::json diagnose(const CsvTable& samples, const std::optional<CsvTable>& trace);

}  // namespace skinf
