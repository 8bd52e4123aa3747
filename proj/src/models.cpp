#include "skinf/models.hpp"

#include "skinf/random.hpp"
#include "skinf/ssa.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace skinf {

namespace {

Reaction mass_action(std::string name, std::vector<int> reactants, std::vector<int> products, int rate) {
  return {std::move(name), std::move(reactants), std::move(products), MassActionHazard{rate}};
}

std::vector<double> grid(double start, double step, int count) {
  std::vector<double> t(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) t[static_cast<std::size_t>(i)] = start + step * i;
  return t;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

void ExperimentBundle::validate() const {
  const int d = dim();
  if (prior.size() != d) throw std::invalid_argument("bundle '" + name + "': prior dimension mismatch");
  if (initial_params.size() != d) throw std::invalid_argument("bundle '" + name + "': initial_params dimension mismatch");
  if (pilot_sd.size() != d) throw std::invalid_argument("bundle '" + name + "': pilot_sd dimension mismatch");
  if (x1.size() != network.num_species()) throw std::invalid_argument("bundle '" + name + "': x1 dimension mismatch");
  if (obs.num_species() != network.num_species())
    throw std::invalid_argument("bundle '" + name + "': observation model species mismatch");
  for (int idx : obs.sd_param)
    if (idx < 0 || idx >= d) throw std::invalid_argument("bundle '" + name + "': sd parameter index out of range");
  obs.validate();
  data.validate(obs);
  if (true_params) {
    if (true_params->size() != d) throw std::invalid_argument("bundle '" + name + "': true_params dimension mismatch");
    if (!std::isfinite(prior.log_density(true_params->array().log().matrix())))
      throw std::invalid_argument("bundle '" + name + "': prior gives zero density at the true parameters");
  }
  if (!std::isfinite(prior.log_density(initial_params.array().log().matrix())))
    throw std::invalid_argument("bundle '" + name + "': prior gives zero density at the initial parameters");
}

ReactionNetwork lotka_volterra_network() {
  return ReactionNetwork({"prey", "predator"}, {"c1", "c2", "c3"},
                         {mass_action("prey_birth", {1, 0}, {2, 0}, 0), mass_action("predation", {1, 1}, {0, 2}, 1),
                          mass_action("predator_death", {0, 1}, {0, 0}, 2)});
}

ReactionNetwork gene_expression_network() {
  Reaction transcription{"transcription", {0, 0}, {1, 0}, PulseHazard{3, 4, 5, 6}};
  return ReactionNetwork({"mRNA", "protein"}, {"gamma_R", "gamma_P", "kappa_P", "b0", "b1", "b2", "b3", "sigma"},
                         {std::move(transcription), mass_action("mrna_decay", {1, 0}, {0, 0}, 0),
                          mass_action("translation", {1, 0}, {1, 1}, 2),
                          mass_action("protein_decay", {0, 1}, {0, 0}, 1)});
}

ReactionNetwork sir_network() {
  return ReactionNetwork({"S", "I"}, {"beta", "gamma"},
                         {mass_action("infection", {1, 1}, {0, 2}, 0), mass_action("removal", {0, 1}, {0, 0}, 1)});
}

ObservationSeries simulate_observations(const ReactionNetwork& net, const ObservationModel& obs, const Vector& x1,
                                        const ParamVector& c, const std::vector<double>& times, std::uint64_t seed) {
  if (times.empty()) throw std::invalid_argument("simulate_observations: no times");
  Rng path_rng(derive_key(seed, {0}));
  Rng noise_rng(derive_key(seed, {1}));
  SsaOptions opts;
  opts.record_events = false;
  opts.max_events = 50'000'000;
  ObservationSeries out;
  Vector x = x1;
  const Matrix sigma_chol = [&]() -> Matrix {
    if (obs.kind != ObservationKind::LinearGaussian) return {};
    return Eigen::LLT<Matrix>(obs.noise_covariance(c)).matrixL();
  }();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k > 0) ssa_advance(net, x, c, times[k - 1], times[k], path_rng, opts);
    const Vector mu = obs.G.transpose() * x;
    Vector y(mu.size());
    switch (obs.kind) {
      case ObservationKind::LinearGaussian: {
        Vector e(mu.size());
        for (Eigen::Index j = 0; j < e.size(); ++j) e[j] = normal(noise_rng);
        y = mu + sigma_chol * e;
        break;
      }
      case ObservationKind::Poisson:
        for (Eigen::Index j = 0; j < mu.size(); ++j) {
          std::poisson_distribution<long long> pois(mu[j]);
          y[j] = mu[j] > 0.0 ? static_cast<double>(pois(noise_rng)) : 0.0;
        }
        break;
      case ObservationKind::Exact:
        y = mu;
        break;
    }
    out.times.push_back(times[k]);
    out.values.push_back(std::move(y));
  }
  return out;
}

ExperimentBundle build_lotka_volterra(std::uint64_t seed) {
  ExperimentBundle b;
  b.name = "lotka-volterra";
  b.network = lotka_volterra_network();
  b.obs = ObservationModel::poisson(2, {0});
  b.prior = Prior(std::vector<PriorComponent>(3, PriorComponent::log_uniform(-8.0, 8.0)));
  b.true_params = vec({1.0, 0.005, 0.6});
  b.initial_params = *b.true_params;
  b.pilot_sd = vec({0.1, 0.1, 0.1});
  b.x1 = vec({70.0, 80.0});
  b.data = simulate_observations(b.network, b.obs, b.x1, ParamVector::from_values(*b.true_params), grid(1.0, 1.0, 50),
                                 seed);
  b.data_seed = seed;
  b.defaults.tau = 1.0;
  b.defaults.dt_max = 0.125;
  b.defaults.lambda_pmmh = 0.7;
  b.defaults.lambda_dapmmh_lna = 3.0;
  b.defaults.lambda_dapmmh_cle = 1.0;
  b.defaults.num_particles = 200;
  b.defaults.pilot_particles = 50;
  b.validate();
  return b;
}

ExperimentBundle build_gene_expression(std::uint64_t seed) {
  ExperimentBundle b;
  b.name = "gene-expression";
  b.network = gene_expression_network();
  Matrix G(2, 1);
  G << 0.0, 1.0;
  b.obs = ObservationModel::gaussian_with_sd_params(G, {7});
  b.prior = Prior({PriorComponent::gamma(19.36, 44.0), PriorComponent::gamma(27.04, 52.0),
                   PriorComponent::exponential(0.01), PriorComponent::exponential(0.01), PriorComponent::exponential(1.0),
                   PriorComponent::exponential(0.1), PriorComponent::exponential(0.01),
                   PriorComponent::exponential(0.01)});
  b.true_params = vec({0.44, 0.52, 10.0, 15.0, 0.4, 7.0, 3.0, 10.0});
  b.initial_params = *b.true_params;
  b.pilot_sd = Vector::Constant(8, 0.05);
  b.x1 = vec({10.0, 150.0});
  b.data = simulate_observations(b.network, b.obs, b.x1, ParamVector::from_values(*b.true_params),
                                 grid(0.0, 0.25, 100), seed);
  b.data_seed = seed;
  b.defaults.tau = 1.0;
  b.defaults.dt_max = 0.05;
  b.defaults.lambda_pmmh = 0.6;
  b.defaults.lambda_dapmmh_lna = 3.0;
  b.defaults.lambda_dapmmh_cle = 1.0;
  b.defaults.num_particles = 250;
  b.defaults.pilot_particles = 50;
  b.validate();
  return b;
}

const std::vector<std::pair<int, int>>& abakaliki_removals() {
  static const std::vector<std::pair<int, int>> table = {
      {0, 1},  {13, 1}, {20, 1}, {22, 1}, {25, 3}, {26, 1}, {30, 1}, {35, 1}, {38, 1}, {40, 2}, {42, 2}, {47, 1},
      {50, 1}, {51, 1}, {55, 2}, {56, 1}, {57, 1}, {58, 1}, {60, 2}, {61, 1}, {66, 2}, {71, 1}, {76, 1}};
  return table;
}

ObservationSeries removals_to_daily_series(const std::vector<std::pair<int, int>>& removals, int population) {
  if (removals.empty()) throw std::invalid_argument("removals_to_daily_series: empty table");
  for (std::size_t i = 0; i < removals.size(); ++i) {
    if (removals[i].first < 0 || removals[i].second < 0)
      throw std::invalid_argument("removals_to_daily_series: negative day or count");
    if (i > 0 && removals[i].first <= removals[i - 1].first)
      throw std::invalid_argument("removals_to_daily_series: days must be strictly increasing");
  }
  const int last = removals.back().first;
  ObservationSeries out;
  int cumulative = 0;
  std::size_t next = 0;
  for (int day = 0; day <= last; ++day) {
    if (next < removals.size() && removals[next].first == day) cumulative += removals[next++].second;
    out.times.push_back(day);
    out.values.push_back(Vector::Constant(1, static_cast<double>(population - cumulative)));
  }
  return out;
}

ExperimentBundle build_abakaliki() {
  ExperimentBundle b;
  b.name = "abakaliki";
  b.network = sir_network();
  b.obs = ObservationModel::exact(Matrix::Ones(2, 1));
  b.prior = Prior({PriorComponent::gamma(10.0, 1e4), PriorComponent::gamma(10.0, 1e2)});
  b.initial_params = vec({1e-3, 0.1});
  b.pilot_sd = vec({0.2, 0.2});
  b.x1 = vec({118.0, 1.0});
  b.data = removals_to_daily_series(abakaliki_removals(), 120);
  b.defaults.tau = 5.0;
  b.defaults.dt_max = 0.1;
  b.defaults.lambda_pmmh = 1.1;
  b.defaults.lambda_dapmmh_lna = 1.1;
  b.defaults.lambda_dapmmh_cle = 1.1;
  b.defaults.num_particles = 2000;
  b.defaults.pilot_particles = 500;
  b.validate();
  return b;
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"lotka-volterra", "gene-expression", "abakaliki"};
  return names;
}

ExperimentBundle builtin_bundle(const std::string& name, std::optional<std::uint64_t> seed) {
  if (name == "lotka-volterra") return build_lotka_volterra(seed.value_or(kLotkaVolterraSeed));
  if (name == "gene-expression") return build_gene_expression(seed.value_or(kGeneExpressionSeed));
  if (name == "abakaliki") {
    if (seed) throw std::invalid_argument("abakaliki uses fixed data; a data seed does not apply");
    return build_abakaliki();
  }
  throw std::invalid_argument("unknown built-in experiment '" + name + "'");
}

}  // namespace skinf
