#include "skinf/mcmc.hpp"

#include "skinf/diagnostics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace skinf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kChainTag = 0xC4A1;
constexpr std::uint64_t kExactTag = 1;
constexpr std::uint64_t kSurrogateTag = 2;
constexpr std::uint64_t kTuneTag = 0x7E57;

double log_uniform(Rng& rng) { return std::log(rng.uniform_open()); }

struct Bookkeeping {
  RunReport report;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  Bookkeeping(const std::string& algorithm, long iterations, Eigen::Index dim, double burn_in) {
    if (iterations < 1) throw std::invalid_argument("mcmc: need at least one iteration");
    if (!(burn_in >= 0.0 && burn_in < 1.0)) throw std::invalid_argument("mcmc: burn-in fraction must be in [0, 1)");
    report.algorithm = algorithm;
    report.iterations = iterations;
    report.samples.resize(iterations, dim);
    report.trace.reserve(static_cast<std::size_t>(iterations));
    report.burn_in_rows = static_cast<long>(std::floor(burn_in * static_cast<double>(iterations)));
  }

  void record(long i, const ChainState& s, StepOutcome outcome) {
    report.samples.row(i - 1) = s.log_c.transpose();
    report.trace.push_back({s.log_ml_exact, s.log_ml_surrogate, outcome});
  }

  RunReport finish() {
    const auto& r = report;
    const double n = static_cast<double>(r.iterations);
    report.alpha1 = static_cast<double>(r.stage1_accepts) / n;
    report.alpha2_given_1 =
        r.stage2_invocations > 0 ? static_cast<double>(r.accepted) / static_cast<double>(r.stage2_invocations) : 0.0;
    const Eigen::MatrixXd post = report.post_burn_in();
    report.ess_per_param = ess_columns(post);
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return std::move(report);
  }
};

}  // namespace

Eigen::MatrixXd ProposalSpec::innovation_covariance() const {
  const auto d = covariance.rows();
  if (d == 0 || covariance.cols() != d) throw std::invalid_argument("ProposalSpec: covariance must be square");
  if (!(scale >= 0.0)) throw std::invalid_argument("ProposalSpec: scale must be non-negative");
  const double deff = d_eff > 0.0 ? d_eff : static_cast<double>(d);
  return scale * (2.38 * 2.38 / deff) * covariance;
}

GaussianRandomWalk::GaussianRandomWalk(const ProposalSpec& spec) {
  const Eigen::MatrixXd cov = spec.innovation_covariance();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("ProposalSpec: innovation covariance is not PD");
  chol_ = llt.matrixL();
}

Eigen::VectorXd GaussianRandomWalk::operator()(const Eigen::VectorXd& log_c, Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd eta(log_c.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = normal(rng);
  return log_c + chol_ * eta;
}

Eigen::VectorXd rw_propose(const Eigen::VectorXd& log_c, const ProposalSpec& spec, Rng& rng) {
  return GaussianRandomWalk(spec)(log_c, rng);
}

double mh_accept_prob(double log_num, double log_den) {
  if (log_num == kNegInf) return 0.0;
  if (log_den == kNegInf) return 1.0;
  const double r = log_num - log_den;
  return r >= 0.0 ? 1.0 : std::exp(r);
}

std::uint64_t exact_stream_key(std::uint64_t seed, long iteration) {
  return derive_key(seed, {kExactTag, static_cast<std::uint64_t>(iteration)});
}

std::uint64_t surrogate_stream_key(std::uint64_t seed, long iteration) {
  return derive_key(seed, {kSurrogateTag, static_cast<std::uint64_t>(iteration)});
}

Eigen::MatrixXd RunReport::post_burn_in() const {
  return samples.bottomRows(samples.rows() - burn_in_rows);
}

RunReport pmmh_run(const LogLikelihoodFn& exact, const LogPriorFn& log_prior, const ProposalFn& proposal,
                   const Eigen::VectorXd& init, const ChainOptions& opts) {
  Bookkeeping book("pmmh", opts.iterations, init.size(), opts.burn_in);
  auto& rep = book.report;
  Rng rng(derive_key(opts.seed, {kChainTag}));

  ChainState s;
  s.log_c = init;
  s.log_prior = log_prior(init);
  if (s.log_prior == kNegInf) throw std::invalid_argument("pmmh: initial point has zero prior density");
  s.log_ml_exact = exact(init, exact_stream_key(opts.seed, 0));
  ++rep.exact_calls;
  if (s.log_ml_exact == kNegInf) throw std::runtime_error("pmmh: likelihood estimate at the initial point is zero");

  for (long i = 1; i <= opts.iterations; ++i) {
    s.iteration = i;
    const Eigen::VectorXd cand = proposal(s.log_c, rng);
    const double lp = log_prior(cand);
    StepOutcome outcome = StepOutcome::PriorReject;
    if (lp != kNegInf) {
      const double le = exact(cand, exact_stream_key(opts.seed, i));
      ++rep.exact_calls;
      outcome = StepOutcome::Stage1Reject;
      if (log_uniform(rng) < (le + lp) - (s.log_ml_exact + s.log_prior)) {
        s.log_c = cand;
        s.log_prior = lp;
        s.log_ml_exact = le;
        ++rep.accepted;
        outcome = StepOutcome::Accept;
      }
    }
    s.log_ml_surrogate = s.log_ml_exact;
    book.record(i, s, outcome);
  }
  // A single stage: every evaluated-and-accepted move counts as passing both.
  rep.stage1_accepts = rep.accepted;
  rep.stage2_invocations = rep.accepted;
  return book.finish();
}

RunReport dapmmh_run(const LogLikelihoodFn& exact, const LogLikelihoodFn& surrogate, const LogPriorFn& log_prior,
                     const ProposalFn& proposal, const Eigen::VectorXd& init, const ChainOptions& opts) {
  Bookkeeping book("dapmmh", opts.iterations, init.size(), opts.burn_in);
  auto& rep = book.report;
  Rng rng(derive_key(opts.seed, {kChainTag}));

  ChainState s;
  s.log_c = init;
  s.log_prior = log_prior(init);
  if (s.log_prior == kNegInf) throw std::invalid_argument("dapmmh: initial point has zero prior density");
  s.log_ml_exact = exact(init, exact_stream_key(opts.seed, 0));
  ++rep.exact_calls;
  s.log_ml_surrogate = surrogate(init, surrogate_stream_key(opts.seed, 0));
  ++rep.surrogate_calls;
  if (s.log_ml_exact == kNegInf || s.log_ml_surrogate == kNegInf)
    throw std::runtime_error("dapmmh: likelihood at the initial point is zero");

  for (long i = 1; i <= opts.iterations; ++i) {
    s.iteration = i;
    const Eigen::VectorXd cand = proposal(s.log_c, rng);
    const double lp = log_prior(cand);
    StepOutcome outcome = StepOutcome::PriorReject;
    if (lp != kNegInf) {
      outcome = StepOutcome::Stage1Reject;
      const double ls = surrogate(cand, surrogate_stream_key(opts.seed, i));
      ++rep.surrogate_calls;
      const double log_a1 = (ls + lp) - (s.log_ml_surrogate + s.log_prior);
      if (ls != kNegInf && log_uniform(rng) < log_a1) {
        ++rep.stage1_accepts;
        ++rep.stage2_invocations;
        outcome = StepOutcome::Stage2Reject;
        const double le = exact(cand, exact_stream_key(opts.seed, i));
        ++rep.exact_calls;
        // [p(y|c*) p(c*) / p(y|c) p(c)] * [p_a(y|c) p(c) / p_a(y|c*) p(c*)], grouped so that
        // identical exact and surrogate values cancel to exactly zero.
        const double log_a2 = ((le - s.log_ml_exact) + (s.log_ml_surrogate - ls)) +
                              ((lp - s.log_prior) + (s.log_prior - lp));
        if (le != kNegInf && log_uniform(rng) < log_a2) {
          s.log_c = cand;
          s.log_prior = lp;
          s.log_ml_exact = le;
          s.log_ml_surrogate = ls;
          ++rep.accepted;
          outcome = StepOutcome::Accept;
        }
      }
    }
    book.record(i, s, outcome);
  }
  return book.finish();
}

ParticleTuneResult pilot_tune_particles(const EstimatorFactory& factory, const Eigen::VectorXd& log_c_hat,
                                        std::vector<int> candidates, int reps, std::uint64_t seed) {
  if (candidates.empty()) throw std::invalid_argument("pilot_tune_particles: no candidates");
  if (reps < 2) throw std::invalid_argument("pilot_tune_particles: need at least two repetitions");
  std::sort(candidates.begin(), candidates.end());
  ParticleTuneResult out;
  for (int n : candidates) {
    const LogLikelihoodFn est = factory(n);
    std::vector<double> vals(static_cast<std::size_t>(reps));
    bool degenerate = false;
    for (int r = 0; r < reps; ++r) {
      vals[static_cast<std::size_t>(r)] =
          est(log_c_hat, derive_key(seed, {kTuneTag, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)}));
      if (!std::isfinite(vals[static_cast<std::size_t>(r)])) degenerate = true;
    }
    ParticleTuneRow row;
    row.num_particles = n;
    if (degenerate) {
      row.mean = kNegInf;
      row.variance = std::numeric_limits<double>::infinity();
    } else {
      row.mean = mean(vals);
      row.variance = sample_variance(vals);
    }
    out.table.push_back(row);
  }
  for (const auto& row : out.table) {
    if (row.variance >= 1.0 && row.variance <= 1.5) {
      out.chosen = row.num_particles;
      return out;
    }
  }
  out.warning = true;
  for (const auto& row : out.table) {
    if (row.variance < 1.0) {
      out.chosen = row.num_particles;
      out.message = "no candidate gave variance in [1, 1.5]; smallest N with variance below 1 chosen";
      return out;
    }
  }
  out.chosen = out.table.back().num_particles;
  out.message = "no candidate gave variance at or below 1.5; largest candidate chosen";
  return out;
}

}  // namespace skinf
