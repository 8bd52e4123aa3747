#include "skinf/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace skinf {

ParamVector ParamVector::from_values(Vector values) {
  ParamVector p;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0)
      throw std::invalid_argument("ParamVector: values must be finite and non-negative");
  }
  p.log_values_ = values.array().log().matrix();
  p.values_ = std::move(values);
  return p;
}

ParamVector ParamVector::from_log(Vector log_values) {
  ParamVector p;
  for (Eigen::Index i = 0; i < log_values.size(); ++i) {
    if (std::isnan(log_values[i]) || log_values[i] == std::numeric_limits<double>::infinity())
      throw std::invalid_argument("ParamVector: log values must be < +inf");
  }
  p.values_ = log_values.array().exp().matrix();
  p.log_values_ = std::move(log_values);
  return p;
}

double binomial_real(double x, int p) noexcept {
  double r = 1.0;
  for (int k = 0; k < p; ++k) r *= (x - k) / (k + 1);
  return r > 0.0 ? r : 0.0;
}

namespace {

// d/dx binom(x, p) on the region where the product is positive.
double binomial_real_derivative(double x, int p) noexcept {
  if (p == 0) return 0.0;
  if (binomial_real(x, p) <= 0.0 && p > 1) return 0.0;
  double fact = 1.0;
  for (int k = 1; k <= p; ++k) fact *= k;
  double sum = 0.0;
  for (int m = 0; m < p; ++m) {
    double prod = 1.0;
    for (int k = 0; k < p; ++k)
      if (k != m) prod *= (x - k);
    sum += prod;
  }
  return sum / fact;
}

double pulse_rate(const PulseHazard& ph, const ParamVector& c, double t) {
  const double d = t - c[ph.centre];
  return c[ph.amplitude] * std::exp(-c[ph.width] * d * d) + c[ph.baseline];
}

}  // namespace

ReactionNetwork::ReactionNetwork(std::vector<std::string> species, std::vector<std::string> params,
                                 std::vector<Reaction> reactions)
    : species_(std::move(species)), params_(std::move(params)), reactions_(std::move(reactions)) {
  const int u = num_species();
  const int v = num_reactions();
  if (u < 1 || v < 1) throw std::invalid_argument("ReactionNetwork: need at least one species and reaction");
  reactant_.setZero(v, u);
  product_.setZero(v, u);
  const int d = num_params();
  auto check_index = [d](int idx) {
    if (idx < 0 || idx >= d) throw std::invalid_argument("ReactionNetwork: parameter index out of range");
  };
  for (int i = 0; i < v; ++i) {
    const auto& r = reactions_[i];
    if (static_cast<int>(r.reactants.size()) != u || static_cast<int>(r.products.size()) != u)
      throw std::invalid_argument("ReactionNetwork: reaction '" + r.name + "' coefficient length mismatch");
    for (int j = 0; j < u; ++j) {
      if (r.reactants[j] < 0 || r.products[j] < 0)
        throw std::invalid_argument("ReactionNetwork: stoichiometric coefficients must be non-negative");
      reactant_(i, j) = r.reactants[j];
      product_(i, j) = r.products[j];
    }
    std::visit(
        [&](const auto& hk) {
          using T = std::decay_t<decltype(hk)>;
          if constexpr (std::is_same_v<T, MassActionHazard>) {
            check_index(hk.rate_index);
          } else if constexpr (std::is_same_v<T, PulseHazard>) {
            check_index(hk.amplitude);
            check_index(hk.width);
            check_index(hk.centre);
            check_index(hk.baseline);
            time_dependent_ = true;
          } else {
            if (!hk.rate) throw std::invalid_argument("ReactionNetwork: custom hazard without rate function");
            if (hk.time_dependent) {
              if (!hk.bound) throw std::invalid_argument("ReactionNetwork: time-dependent hazard needs a bound");
              time_dependent_ = true;
            }
            if (!hk.gradient) analytic_jacobian_ = false;
          }
        },
        r.hazard);
  }
  mass_rate_.assign(static_cast<std::size_t>(v), -1);
  terms_.resize(static_cast<std::size_t>(v));
  for (int i = 0; i < v; ++i) {
    const auto& r = reactions_[i];
    if (const auto* ma = std::get_if<MassActionHazard>(&r.hazard)) mass_rate_[i] = ma->rate_index;
    for (int j = 0; j < u; ++j)
      if (r.reactants[j] != 0) terms_[i].emplace_back(j, r.reactants[j]);
  }
  stoich_ = (product_ - reactant_).transpose();
  stoich_real_ = stoich_.cast<double>();
}

bool ReactionNetwork::serializable() const noexcept {
  return std::none_of(reactions_.begin(), reactions_.end(),
                      [](const Reaction& r) { return std::holds_alternative<CustomHazard>(r.hazard); });
}

double ReactionNetwork::hazard_one(int i, StateView x, const ParamVector& c, double t) const {
  if (const int rate = mass_rate_[i]; rate >= 0) {
    double h = c[rate];
    for (const auto& [j, p] : terms_[i]) {
      if (p == 1) h *= x[j];
      else h *= binomial_real(x[j], p);
    }
    return h;
  }
  const auto& r = reactions_[i];
  if (const auto* ph = std::get_if<PulseHazard>(&r.hazard)) return pulse_rate(*ph, c, t);
  return std::get<CustomHazard>(r.hazard).rate(x, c, t);
}

void ReactionNetwork::hazards_into(StateView x, const ParamVector& c, double t, std::span<double> h) const {
  const int u = num_species();
  for (int j = 0; j < u; ++j) {
    if (x[j] < 0.0) throw std::domain_error("hazards: negative state component for species '" + species_[j] + "'");
  }
  const int v = num_reactions();
  for (int i = 0; i < v; ++i) h[i] = hazard_one(i, x, c, t);
}

double ReactionNetwork::hazard_bound(int i, StateView x, const ParamVector& c, double t0, double t1) const {
  const auto& r = reactions_[i];
  if (const auto* ph = std::get_if<PulseHazard>(&r.hazard)) {
    // exp(-b1 (t - b2)^2) <= 1, so the pulse never exceeds b0 + b3.
    return c[ph->amplitude] + c[ph->baseline];
  }
  if (const auto* ch = std::get_if<CustomHazard>(&r.hazard)) {
    if (ch->time_dependent) return ch->bound(x, c, t0, t1);
    return ch->rate(x, c, t0);
  }
  return hazard_one(i, x, c, t0);
}

void ReactionNetwork::hazard_gradient(int i, StateView x, const ParamVector& c, double t,
                                      std::span<double> grad) const {
  const int u = num_species();
  const auto& r = reactions_[i];
  std::fill(grad.begin(), grad.end(), 0.0);
  if (const auto* ma = std::get_if<MassActionHazard>(&r.hazard)) {
    for (int j = 0; j < u; ++j) {
      if (r.reactants[j] == 0) continue;
      double g = c[ma->rate_index] * binomial_real_derivative(x[j], r.reactants[j]);
      for (int k = 0; k < u && g != 0.0; ++k)
        if (k != j && r.reactants[k] != 0) g *= binomial_real(x[k], r.reactants[k]);
      grad[j] = g;
    }
    return;
  }
  if (std::holds_alternative<PulseHazard>(r.hazard)) return;
  const auto& ch = std::get<CustomHazard>(r.hazard);
  if (!ch.gradient) throw std::logic_error("hazard_gradient: custom hazard has no gradient");
  ch.gradient(x, c, t, grad);
}

Vector hazards(const ReactionNetwork& net, const Vector& x, const ParamVector& c, double t) {
  if (x.size() != net.num_species()) throw std::invalid_argument("hazards: state has wrong dimension");
  Vector h(net.num_reactions());
  net.hazards_into({x.data(), static_cast<std::size_t>(x.size())}, c, t, {h.data(), static_cast<std::size_t>(h.size())});
  return h;
}

double total_hazard(const Vector& h) { return h.sum(); }

Matrix jacobian(const ReactionNetwork& net, const Vector& z, const ParamVector& c, double t) {
  if (!net.has_analytic_jacobian()) return jacobian_fd(net, z, c, t);
  const int u = net.num_species();
  const int v = net.num_reactions();
  Matrix dh(v, u);
  std::vector<double> grad(u);
  for (int i = 0; i < v; ++i) {
    net.hazard_gradient(i, {z.data(), static_cast<std::size_t>(u)}, c, t, grad);
    for (int j = 0; j < u; ++j) dh(i, j) = grad[j];
  }
  return net.stoich_real() * dh;
}

Matrix jacobian_fd(const ReactionNetwork& net, const Vector& z, const ParamVector& c, double t) {
  const int u = net.num_species();
  Matrix F(u, u);
  const Matrix& S = net.stoich_real();
  for (int j = 0; j < u; ++j) {
    const double step = std::max(1e-6, 1e-6 * std::abs(z[j]));
    Vector hi = z;
    Vector lo = z;
    hi[j] += step;
    double width = 2.0 * step;
    if (z[j] - step < 0.0) {
      width = step;
    } else {
      lo[j] -= step;
    }
    F.col(j) = S * (hazards(net, hi, c, t) - hazards(net, lo, c, t)) / width;
  }
  return F;
}

}  // namespace skinf
