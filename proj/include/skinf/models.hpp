#pragma once

#include "skinf/network.hpp"
#include "skinf/observation.hpp"
#include "skinf/prior.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace skinf {

/// Default tuning for the built-in experiments.
struct SurrogateDefaults {
  double tau = 1.0;
  double dt_max = 0.1;
  double lambda_pmmh = 1.0;
  double lambda_dapmmh_lna = 1.0;
  double lambda_dapmmh_cle = 1.0;
  int num_particles = 100;
  int pilot_particles = 50;
  double d_eff = 3.0;

  bool operator==(const SurrogateDefaults&) const = default;
};

struct ExperimentBundle {
  std::string name;
  ReactionNetwork network;
  ObservationModel obs;
  Prior prior;
  std::optional<Vector> true_params;  // natural scale
  Vector initial_params;              // natural scale, where chains start
  Vector pilot_sd;                    // log scale, diagonal pilot proposal
  Vector x1;
  ObservationSeries data;
  SurrogateDefaults defaults;
  std::optional<std::uint64_t> data_seed;

  int dim() const noexcept { return network.num_params(); }
  void validate() const;
};

constexpr std::uint64_t kLotkaVolterraSeed = 16;
constexpr std::uint64_t kGeneExpressionSeed = 20140614;

/// Prey-predator system observed through Poisson noise on the prey count
/// at t = 1, ..., 50. Data are regenerated by SSA from `seed`.
ExperimentBundle build_lotka_volterra(std::uint64_t seed = kLotkaVolterraSeed);

/// mRNA/protein system with a pulsed transcription rate; protein observed
/// with Gaussian noise of unknown sd every 0.25 h for 25 h.
ExperimentBundle build_gene_expression(std::uint64_t seed = kGeneExpressionSeed);

/// SIR model on the Abakaliki smallpox removal data, observed exactly as
/// S + I on a daily grid.
ExperimentBundle build_abakaliki();

/// Network and observation model only, with no data attached.
ReactionNetwork lotka_volterra_network();
ReactionNetwork gene_expression_network();
ReactionNetwork sir_network();

/// (day, removals) pairs of the Abakaliki outbreak, first removal on day 0.
const std::vector<std::pair<int, int>>& abakaliki_removals();

/// Expands removal days to a daily grid 0..last_day, with
/// y_t = population - cumulative removals through day t.
ObservationSeries removals_to_daily_series(const std::vector<std::pair<int, int>>& removals, int population);

/// Simulates the jump process from x1 over data times and draws observations.
ObservationSeries simulate_observations(const ReactionNetwork& net, const ObservationModel& obs, const Vector& x1,
                                        const ParamVector& c, const std::vector<double>& times, std::uint64_t seed);

/// Builds a built-in bundle by name: "lotka-volterra", "gene-expression" or "abakaliki".
ExperimentBundle builtin_bundle(const std::string& name, std::optional<std::uint64_t> seed = std::nullopt);

const std::vector<std::string>& builtin_names();

}  // namespace skinf
