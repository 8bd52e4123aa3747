#include "skinf/prior.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace skinf {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

PriorComponent PriorComponent::log_uniform(double lower, double upper) {
  if (!(upper > lower)) throw std::invalid_argument("log_uniform prior: need lower < upper");
  return {Kind::LogUniform, lower, upper};
}

PriorComponent PriorComponent::gamma(double shape, double rate) {
  if (!(shape > 0.0 && rate > 0.0)) throw std::invalid_argument("gamma prior: shape and rate must be positive");
  return {Kind::Gamma, shape, rate};
}

PriorComponent PriorComponent::exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential prior: rate must be positive");
  return {Kind::Exponential, rate, 0.0};
}

double PriorComponent::log_density(double theta) const {
  if (!std::isfinite(theta)) return kNegInf;
  switch (kind) {
    case Kind::LogUniform:
      if (theta <= a || theta >= b) return kNegInf;
      return -std::log(b - a);
    case Kind::Gamma:
      // log Gamma(c; a, b) + log c
      return a * std::log(b) - std::lgamma(a) + a * theta - b * std::exp(theta);
    case Kind::Exponential:
      return std::log(a) - a * std::exp(theta) + theta;
  }
  return kNegInf;
}

Prior::Prior(std::vector<PriorComponent> components) : components_(std::move(components)) {}

double Prior::log_density(const Eigen::VectorXd& log_c) const {
  if (log_c.size() != size()) throw std::invalid_argument("Prior: dimension mismatch");
  double lp = 0.0;
  for (int i = 0; i < size(); ++i) {
    lp += components_[static_cast<std::size_t>(i)].log_density(log_c[i]);
    if (lp == kNegInf) return kNegInf;
  }
  return lp;
}

}  // namespace skinf
