#include "skinf/ssa.hpp"

#include <cmath>
#include <random>
#include <string>

namespace skinf {

namespace {

struct Recorder {
  std::vector<JumpEvent>* events = nullptr;
  Eigen::VectorXi* counts = nullptr;
};

int pick_reaction(const std::vector<double>& h, double h0, Rng& rng) {
  const double target = rng.uniform_open() * h0;
  double acc = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i] <= 0.0) continue;
    acc += h[i];
    last_positive = static_cast<int>(i);
    if (target < acc) return last_positive;
  }
  return last_positive;  // rounding at the top of the cumulative sum
}

void fire(const ReactionNetwork& net, Vector& x, int r) {
  const auto& S = net.stoich();
  for (int j = 0; j < net.num_species(); ++j) x[j] += S(j, r);
}

void check_finite(const std::vector<double>& h, double t) {
  for (double hi : h)
    if (!std::isfinite(hi)) throw std::runtime_error("ssa: non-finite hazard at t=" + std::to_string(t));
}

double bound_at(const ReactionNetwork& net, const Vector& x, const ParamVector& c, double t0, double t1) {
  const StateView xv{x.data(), static_cast<std::size_t>(x.size())};
  double b = 0.0;
  for (int i = 0; i < net.num_reactions(); ++i) b += net.hazard_bound(i, xv, c, t0, t1);
  return b;
}

void run(const ReactionNetwork& net, Vector& x, const ParamVector& c, double t0, double t1, Rng& rng,
         const SsaOptions& opts, Recorder rec) {
  if (!(t1 > t0)) throw std::invalid_argument("ssa: require t0 < t1");
  SsaMethod method = opts.method;
  if (method == SsaMethod::Auto) method = net.time_dependent() ? SsaMethod::Thinning : SsaMethod::Direct;
  if (method == SsaMethod::Direct && net.time_dependent())
    throw std::invalid_argument("ssa: direct method needs time-homogeneous hazards");

  const int v = net.num_reactions();
  std::vector<double> h(static_cast<std::size_t>(v));
  const std::span<double> hs{h.data(), h.size()};
  std::exponential_distribution<double> expo(1.0);
  std::uint64_t n_events = 0;
  double t = t0;

  auto record = [&](int r) {
    if (rec.counts) (*rec.counts)[r] += 1;
    if (rec.events) rec.events->push_back({t, r});
    if (opts.max_events != 0 && ++n_events > opts.max_events)
      throw SsaEventLimit("ssa: event limit exceeded before t=" + std::to_string(t1));
  };

  if (method == SsaMethod::Direct) {
    for (;;) {
      net.hazards_into({x.data(), static_cast<std::size_t>(x.size())}, c, t, hs);
      check_finite(h, t);
      double h0 = 0.0;
      for (double hi : h) h0 += hi;
      if (h0 <= 0.0) return;
      t += expo(rng) / h0;
      if (t > t1) return;
      const int r = pick_reaction(h, h0, rng);
      fire(net, x, r);
      record(r);
    }
  }

  double bound = opts.bound_slack * bound_at(net, x, c, t, t1);
  for (;;) {
    if (!std::isfinite(bound)) throw std::runtime_error("ssa: non-finite hazard bound at t=" + std::to_string(t));
    if (bound <= 0.0) return;
    t += expo(rng) / bound;
    if (t > t1) return;
    net.hazards_into({x.data(), static_cast<std::size_t>(x.size())}, c, t, hs);
    check_finite(h, t);
    double h0 = 0.0;
    for (double hi : h) h0 += hi;
    if (h0 > bound * (1.0 + 1e-12))
      throw std::runtime_error("ssa: thinning bound violated at t=" + std::to_string(t));
    if (rng.uniform_open() * bound >= h0) continue;
    const int r = pick_reaction(h, h0, rng);
    fire(net, x, r);
    record(r);
    bound = opts.bound_slack * bound_at(net, x, c, t, t1);
  }
}

}  // namespace

JumpPath ssa_simulate(const ReactionNetwork& net, const Vector& x0, const ParamVector& c, double t0, double t1,
                      Rng& rng, const SsaOptions& opts) {
  if (x0.size() != net.num_species()) throw std::invalid_argument("ssa: state has wrong dimension");
  JumpPath path;
  path.t0 = t0;
  path.t1 = t1;
  path.initial = x0;
  path.event_counts = Eigen::VectorXi::Zero(net.num_reactions());
  Vector x = x0;
  run(net, x, c, t0, t1, rng, opts, {opts.record_events ? &path.events : nullptr, &path.event_counts});
  path.final_state = std::move(x);
  return path;
}

void ssa_advance(const ReactionNetwork& net, Vector& x, const ParamVector& c, double t0, double t1, Rng& rng,
                 const SsaOptions& opts) {
  run(net, x, c, t0, t1, rng, opts, {});
}

double upper_bound_rate(const ReactionNetwork& net, const Vector& x, const ParamVector& c, double t0, double t1) {
  return bound_at(net, x, c, t0, t1);
}

}  // namespace skinf
