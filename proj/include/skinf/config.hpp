#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace skinf {

enum class Algorithm { Pmmh, DapmmhLna, DapmmhCle };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

/// Malformed or inconsistent configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything needed to reproduce one chain. Optional fields fall back to
/// the experiment's defaults when the run is assembled.
struct RunConfig {
  std::string experiment;                   // built-in name or path to a bundle JSON file
  std::optional<std::uint64_t> data_seed;   // regenerates synthetic data for built-ins
  Algorithm algorithm = Algorithm::Pmmh;
  std::optional<int> num_particles;         // N
  std::optional<int> surrogate_particles;   // N1, CLE surrogate only; defaults to N
  long iterations = 0;
  double burn_in = 0.1;
  std::optional<double> lambda;
  double tau = 1.0;                         // LNA surrogate only
  std::optional<double> dt_max;             // CLE surrogate only, required there
  double rtol = 1e-6;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output_dir = "out";
  std::optional<std::string> pilot;         // pilot.json with covariance and posterior mean
  std::optional<Eigen::MatrixXd> proposal_covariance;
  std::optional<Eigen::VectorXd> initial_log_params;
  std::optional<double> d_eff;
  bool density = false;

  nlohmann::json to_json() const;
};

/// Parses and validates a JSON configuration. Unknown keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig parse_config(const char* text);
RunConfig parse_config(const nlohmann::json& doc);

}  // namespace skinf
