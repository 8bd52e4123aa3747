#pragma once

#include "skinf/network.hpp"
#include "skinf/observation.hpp"
#include "skinf/random.hpp"
#include "skinf/ssa.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace skinf {

/// Propagates one latent state from t0 to t1 in place.
using ForwardSimulator = std::function<void(Vector& x, double t0, double t1, const ParamVector& c, Rng& rng)>;

ForwardSimulator ssa_forward(const ReactionNetwork& net, SsaOptions opts = {});
ForwardSimulator cle_forward(const ReactionNetwork& net, double dt_max);

/// N weighted particles. States are stored column-wise (u x N).
struct ParticleSet {
  Matrix states;
  Vector log_weights_unnorm;
  Vector norm_weights;
  double log_ml_running = 0.0;

  int size() const noexcept { return static_cast<int>(states.cols()); }

  /// Recomputes norm_weights from log_weights_unnorm with the max-shift
  /// trick and returns log((1/N) sum w*). Returns -inf (weights untouched)
  /// if every weight is -inf.
  double normalize();
};

enum class ResamplingScheme { Multinomial };

/// Ancestor indices of N i.i.d. categorical draws from `norm_weights`.
std::vector<int> multinomial_ancestors(const Vector& norm_weights, int n, Rng& rng);

/// N equally weighted particles drawn with replacement. Throws
/// std::domain_error if no weight is positive.
ParticleSet resample_multinomial(const ParticleSet& ps, Rng& rng);

struct FilterOptions {
  int num_particles = 100;
  int workers = 1;
  ResamplingScheme resampling = ResamplingScheme::Multinomial;
};

/// Bootstrap particle filter estimate of log p(y | c) from a known initial
/// state x1 at data.times[0]. Resamples after every weighting. Per-particle
/// substreams are derived from (stream_key, time index, particle index) so
/// the estimate does not depend on the worker count. Returns -inf when all
/// weights vanish at some time or when a forward simulation fails.
double bootstrap_filter(const ForwardSimulator& sim, const ObservationModel& obs, const ObservationSeries& data,
                        const ParamVector& c, const Vector& x1, std::uint64_t stream_key,
                        const FilterOptions& opts = {});

/// log(mean(exp(v))) over the entries of v.
double log_mean_exp(const Vector& v);

}  // namespace skinf
