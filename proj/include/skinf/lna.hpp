#pragma once

#include "skinf/network.hpp"
#include "skinf/observation.hpp"

#include <stdexcept>
#include <vector>

namespace skinf {

/// Deterministic path z, residual mean m, residual covariance V, plus the
/// filtered posterior (a, C) at the last observation time.
struct LnaBelief {
  double t = 0.0;
  Vector z;
  Vector m;
  Matrix V;
  Vector a;
  Matrix C;

  /// z = a = x, m = 0, V = C = 0.
  static LnaBelief at_known_state(double t, const Vector& x);
};

struct OdeTolerances {
  double rtol = 1e-6;
  double atol = 1e-8;
  long max_steps = 200000;
};

/// Step-size underflow or step budget exhausted while integrating the
/// moment equations.
class LnaIntegrationError : public std::runtime_error {
 public:
  LnaIntegrationError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Advances (z, V) to t_end with an adaptive Dormand-Prince 5(4) pair:
///   dz/dt = S h(z),  dV/dt = V F' + S diag{h(z)} S' + F V,
/// with hazards evaluated at max(z, 0). The residual mean obeys dm/dt = F m
/// and is only integrated when nonzero. V is re-symmetrized on return.
LnaBelief integrate_moments(const ReactionNetwork& net, const LnaBelief& belief, const ParamVector& c, double t_end,
                            const OdeTolerances& tol = {});

/// One observation time of the restarting filter, kept for diagnostics.
struct LnaStep {
  double t = 0.0;
  Vector z;
  Matrix V;
  Vector forecast_mean;
  Matrix forecast_cov;
  Vector a;
  Matrix C;
  double log_factor = 0.0;
};

/// log p_a(y | c) under the LNA, restarting the deterministic path at the
/// filtered mean after every observation. Returns -inf when a forecast
/// covariance cannot be factorized, when an exact observation contradicts
/// a degenerate forecast, or when the moment integration fails.
double lna_log_marginal(const ReactionNetwork& net, const ObservationModel& obs, const ObservationSeries& data,
                        const ParamVector& c, const Vector& x1, const OdeTolerances& tol = {},
                        std::vector<LnaStep>* trace = nullptr);

/// log(p^(1/tau)), tau >= 1.
double temper(double log_p, double tau);

}  // namespace skinf
