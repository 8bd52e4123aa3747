#pragma once

#include "skinf/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace skinf {

/// Log marginal-likelihood (estimate) at log parameters. `stream_key`
/// identifies the random stream the estimator must use; deterministic
/// estimators ignore it.
using LogLikelihoodFn = std::function<double(const Eigen::VectorXd& log_c, std::uint64_t stream_key)>;
using LogPriorFn = std::function<double(const Eigen::VectorXd& log_c)>;
/// Symmetric proposal kernel: q(a -> b) == q(b -> a).
using ProposalFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& log_c, Rng& rng)>;

/// Gaussian random walk with innovation covariance scale * (2.38^2 / d_eff) * covariance.
struct ProposalSpec {
  double scale = 1.0;
  Eigen::MatrixXd covariance;
  double d_eff = 0.0;  // <= 0 means the parameter dimension

  Eigen::MatrixXd innovation_covariance() const;
};

class GaussianRandomWalk {
 public:
  explicit GaussianRandomWalk(const ProposalSpec& spec);
  Eigen::VectorXd operator()(const Eigen::VectorXd& log_c, Rng& rng) const;
  const Eigen::MatrixXd& cholesky_factor() const noexcept { return chol_; }

 private:
  Eigen::MatrixXd chol_;
};

/// log_c + L eta, L L' = innovation covariance.
Eigen::VectorXd rw_propose(const Eigen::VectorXd& log_c, const ProposalSpec& spec, Rng& rng);

/// min(1, exp(log_num - log_den)) with -inf numerator -> 0 and -inf
/// denominator (finite numerator) -> 1.
double mh_accept_prob(double log_num, double log_den);

struct ChainState {
  Eigen::VectorXd log_c;
  double log_prior = 0.0;
  double log_ml_exact = 0.0;
  double log_ml_surrogate = 0.0;
  long iteration = 0;
};

enum class StepOutcome : int {
  PriorReject = 0,
  Stage1Reject = 1,
  Stage2Reject = 2,
  Accept = 3,
};

struct TraceRow {
  double log_ml_exact = 0.0;
  double log_ml_surrogate = 0.0;
  StepOutcome outcome = StepOutcome::PriorReject;
};

struct ChainOptions {
  long iterations = 1000;
  std::uint64_t seed = 1;
  double burn_in = 0.1;
};

struct RunReport {
  std::string algorithm;
  Eigen::MatrixXd samples;  // iterations x d, row i is the state after iteration i + 1
  long burn_in_rows = 0;
  std::vector<TraceRow> trace;
  double alpha1 = 0.0;
  double alpha2_given_1 = 0.0;
  Eigen::VectorXd ess_per_param;
  double wall_time = 0.0;
  long iterations = 0;
  long stage1_accepts = 0;
  long stage2_invocations = 0;
  long accepted = 0;
  long exact_calls = 0;
  long surrogate_calls = 0;

  Eigen::MatrixXd post_burn_in() const;
};

/// Random-walk pseudo-marginal Metropolis-Hastings. One exact call at the
/// initial point plus one per iteration with positive prior mass; the
/// cached estimate at the current point is never recomputed.
RunReport pmmh_run(const LogLikelihoodFn& exact, const LogPriorFn& log_prior, const ProposalFn& proposal,
                   const Eigen::VectorXd& init, const ChainOptions& opts);

/// Delayed-acceptance PMMH. Stage 1 screens with the surrogate; the exact
/// estimator runs only on Stage-1 acceptance, and Stage 2 divides out the
/// surrogate ratio so the chain still targets the exact posterior.
RunReport dapmmh_run(const LogLikelihoodFn& exact, const LogLikelihoodFn& surrogate, const LogPriorFn& log_prior,
                     const ProposalFn& proposal, const Eigen::VectorXd& init, const ChainOptions& opts);

/// Stream keys used by the kernels, exposed so tests can replay them.
std::uint64_t exact_stream_key(std::uint64_t seed, long iteration);
std::uint64_t surrogate_stream_key(std::uint64_t seed, long iteration);

struct ParticleTuneRow {
  int num_particles = 0;
  double mean = 0.0;
  double variance = 0.0;
};

struct ParticleTuneResult {
  std::vector<ParticleTuneRow> table;
  int chosen = 0;
  bool warning = false;
  std::string message;
};

using EstimatorFactory = std::function<LogLikelihoodFn(int num_particles)>;

/// Variance of log p-hat over `reps` independent runs per candidate N.
/// Picks the smallest N with variance in [1, 1.5]; failing that, the
/// smallest N with variance below 1.5 (with a warning); failing that, the
/// largest candidate (with a warning).
ParticleTuneResult pilot_tune_particles(const EstimatorFactory& factory, const Eigen::VectorXd& log_c_hat,
                                        std::vector<int> candidates, int reps, std::uint64_t seed);

}  // namespace skinf
