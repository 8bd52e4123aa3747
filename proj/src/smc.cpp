#include "skinf/smc.hpp"

#include "skinf/cle.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace skinf {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kResampleTag = ~std::uint64_t{0};
}  // namespace

ForwardSimulator ssa_forward(const ReactionNetwork& net, SsaOptions opts) {
  opts.record_events = false;
  return [&net, opts](Vector& x, double t0, double t1, const ParamVector& c, Rng& rng) {
    ssa_advance(net, x, c, t0, t1, rng, opts);
  };
}

ForwardSimulator cle_forward(const ReactionNetwork& net, double dt_max) {
  if (!(dt_max > 0.0)) throw std::invalid_argument("cle_forward: dt_max must be positive");
  return [&net, dt_max](Vector& x, double t0, double t1, const ParamVector& c, Rng& rng) {
    x = cle_simulate(net, x, c, t0, t1, dt_max, rng).x;
  };
}

double log_mean_exp(const Vector& v) {
  if (v.size() == 0) return kNegInf;
  const double m = v.maxCoeff();
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s) - std::log(static_cast<double>(v.size()));
}

double ParticleSet::normalize() {
  const double lme = log_mean_exp(log_weights_unnorm);
  if (lme == kNegInf) return kNegInf;
  const double m = log_weights_unnorm.maxCoeff();
  norm_weights = (log_weights_unnorm.array() - m).exp().matrix();
  norm_weights /= norm_weights.sum();
  return lme;
}

std::vector<int> multinomial_ancestors(const Vector& norm_weights, int n, Rng& rng) {
  std::discrete_distribution<int> pick(norm_weights.data(), norm_weights.data() + norm_weights.size());
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (auto& i : idx) i = pick(rng);
  return idx;
}

ParticleSet resample_multinomial(const ParticleSet& ps, Rng& rng) {
  const int n = ps.size();
  if (n < 1) throw std::invalid_argument("resample_multinomial: empty particle set");
  if (!(ps.norm_weights.size() == n && ps.norm_weights.maxCoeff() > 0.0))
    throw std::domain_error("resample_multinomial: no particle carries positive weight");
  const auto anc = multinomial_ancestors(ps.norm_weights, n, rng);
  ParticleSet out;
  out.states.resize(ps.states.rows(), n);
  for (int i = 0; i < n; ++i) out.states.col(i) = ps.states.col(anc[static_cast<std::size_t>(i)]);
  out.log_weights_unnorm = Vector::Zero(n);
  out.norm_weights = Vector::Constant(n, 1.0 / n);
  out.log_ml_running = ps.log_ml_running;
  return out;
}

double bootstrap_filter(const ForwardSimulator& sim, const ObservationModel& obs, const ObservationSeries& data,
                        const ParamVector& c, const Vector& x1, std::uint64_t stream_key, const FilterOptions& opts) {
  const int n = opts.num_particles;
  if (n < 1) throw std::invalid_argument("bootstrap_filter: need at least one particle");
  if (data.size() == 0) throw std::invalid_argument("bootstrap_filter: no data");

  // x1 is known, so the first weighting is the same constant for every particle.
  const double first = obs_log_density(obs, data.values[0], x1, c);
  if (first == kNegInf) return kNegInf;

  ParticleSet ps;
  ps.states = x1.replicate(1, n);
  ps.log_weights_unnorm = Vector::Zero(n);
  ps.norm_weights = Vector::Constant(n, 1.0 / n);
  ps.log_ml_running = first;

  const int workers = opts.workers < 1 ? 1 : opts.workers;
  for (std::size_t k = 1; k < data.size(); ++k) {
    const double t0 = data.times[k - 1];
    const double t1 = data.times[k];
    const Vector& y = data.values[k];
    std::atomic<bool> failed{false};

#pragma omp parallel for num_threads(workers) schedule(static)
    for (int i = 0; i < n; ++i) {
      if (failed.load(std::memory_order_relaxed)) continue;
      Rng rng(derive_key(stream_key, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i)}));
      Vector x = ps.states.col(i);
      try {
        sim(x, t0, t1, c, rng);
        ps.log_weights_unnorm[i] = obs_log_density(obs, y, x, c);
      } catch (const std::runtime_error&) {
        failed.store(true, std::memory_order_relaxed);
      }
      ps.states.col(i) = x;
    }
    if (failed.load()) return kNegInf;

    const double inc = ps.normalize();
    if (inc == kNegInf) return kNegInf;
    ps.log_ml_running += inc;
    if (k + 1 < data.size()) {
      Rng rrng(derive_key(stream_key, {static_cast<std::uint64_t>(k), kResampleTag}));
      ps = resample_multinomial(ps, rrng);
    }
  }
  return ps.log_ml_running;
}

}  // namespace skinf
