#pragma once

#include "skinf/network.hpp"
#include "skinf/random.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace skinf {

enum class SsaMethod {
  Auto,      // thinning for time-dependent networks, direct otherwise
  Direct,    // Gillespie direct method, time-homogeneous hazards only
  Thinning,  // propose at an upper-bound rate, accept with h0 / bound
};

struct SsaOptions {
  SsaMethod method = SsaMethod::Auto;
  /// Multiplies the thinning bound. Values > 1 only cost efficiency.
  double bound_slack = 1.0;
  bool record_events = true;
  /// Hard cap on events per call; 0 means unlimited. Exceeding it throws SsaEventLimit.
  std::uint64_t max_events = 0;
};

/// Raised when a simulation exceeds SsaOptions::max_events (explosive dynamics).
class SsaEventLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct JumpEvent {
  double time = 0.0;
  int reaction = 0;
};

struct JumpPath {
  double t0 = 0.0;
  double t1 = 0.0;
  Vector initial;
  std::vector<JumpEvent> events;  // empty in states-only mode
  Vector final_state;
  Eigen::VectorXi event_counts;   // Delta R over [t0, t1]
};

/// Exact draw of the jump process on [t0, t1] started from x0.
JumpPath ssa_simulate(const ReactionNetwork& net, const Vector& x0, const ParamVector& c, double t0, double t1,
                      Rng& rng, const SsaOptions& opts = {});

/// States-only variant: advances `x` in place from t0 to t1.
void ssa_advance(const ReactionNetwork& net, Vector& x, const ParamVector& c, double t0, double t1, Rng& rng,
                 const SsaOptions& opts = {});

/// h0 bound valid over [t0, t1] at fixed state x. Exact h0 for
/// time-homogeneous networks.
double upper_bound_rate(const ReactionNetwork& net, const Vector& x, const ParamVector& c, double t0, double t1);

}  // namespace skinf
