#include "skinf/estimators.hpp"

#include "skinf/smc.hpp"

#include <limits>
#include <memory>
#include <stdexcept>

namespace skinf {

namespace {

// Owns copies of everything the closures need so they outlive the bundle.
struct Problem {
  ReactionNetwork net;
  ObservationModel obs;
  ObservationSeries data;
  Vector x1;
  Prior prior;
};

std::shared_ptr<const Problem> share(const ExperimentBundle& b) {
  return std::make_shared<const Problem>(Problem{b.network, b.obs, b.data, b.x1, b.prior});
}

struct FilterEstimator {
  std::shared_ptr<const Problem> problem;
  ForwardSimulator sim;
  FilterOptions opts;

  double operator()(const Eigen::VectorXd& log_c, std::uint64_t key) const {
    const ParamVector c = ParamVector::from_log(log_c);
    return bootstrap_filter(sim, problem->obs, problem->data, c, problem->x1, key, opts);
  }
};

FilterOptions filter_options(int num_particles, int workers) {
  if (num_particles < 1) throw std::invalid_argument("estimator: number of particles must be positive");
  FilterOptions o;
  o.num_particles = num_particles;
  o.workers = workers;
  return o;
}

}  // namespace

LogLikelihoodFn make_mjp_estimator(const ExperimentBundle& bundle, int num_particles, int workers,
                                   std::uint64_t max_events) {
  auto p = share(bundle);
  SsaOptions so;
  so.record_events = false;
  so.max_events = max_events;
  return FilterEstimator{p, ssa_forward(p->net, so), filter_options(num_particles, workers)};
}

LogLikelihoodFn make_cle_estimator(const ExperimentBundle& bundle, int num_particles, double dt_max, int workers) {
  auto p = share(bundle);
  return FilterEstimator{p, cle_forward(p->net, dt_max), filter_options(num_particles, workers)};
}

LogLikelihoodFn make_lna_surrogate(const ExperimentBundle& bundle, double tau, const OdeTolerances& tol) {
  if (!(tau >= 1.0)) throw std::invalid_argument("LNA surrogate: tau must be at least 1");
  auto p = share(bundle);
  return [p, tau, tol](const Eigen::VectorXd& log_c, std::uint64_t) {
    const ParamVector c = ParamVector::from_log(log_c);
    return temper(lna_log_marginal(p->net, p->obs, p->data, c, p->x1, tol), tau);
  };
}

LogPriorFn make_log_prior(const ExperimentBundle& bundle) {
  auto p = share(bundle);
  return [p](const Eigen::VectorXd& log_c) { return p->prior.log_density(log_c); };
}

}  // namespace skinf
