#pragma once

#include "skinf/lna.hpp"
#include "skinf/mcmc.hpp"
#include "skinf/models.hpp"
#include "skinf/ssa.hpp"

#include <cstdint>

namespace skinf {

/// Cap on jump events per particle and inter-observation interval. A
/// proposal that drives the system past it is treated as having zero
/// likelihood.
constexpr std::uint64_t kDefaultMaxEvents = 1'000'000;

/// Bootstrap filter over exact jump-process simulation.
LogLikelihoodFn make_mjp_estimator(const ExperimentBundle& bundle, int num_particles, int workers = 1,
                                   std::uint64_t max_events = kDefaultMaxEvents);

/// Bootstrap filter over Euler-Maruyama paths of the chemical Langevin equation.
LogLikelihoodFn make_cle_estimator(const ExperimentBundle& bundle, int num_particles, double dt_max, int workers = 1);

/// Deterministic LNA log marginal likelihood raised to the power 1/tau.
LogLikelihoodFn make_lna_surrogate(const ExperimentBundle& bundle, double tau = 1.0, const OdeTolerances& tol = {});

LogPriorFn make_log_prior(const ExperimentBundle& bundle);

}  // namespace skinf
