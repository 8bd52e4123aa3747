#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace skinf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntMatrix = Eigen::MatrixXi;

/// Rate constants (plus any observation parameters) held on both the natural
/// and the log scale. The MCMC layer works on the log scale.
class ParamVector {
 public:
  ParamVector() = default;

  /// Values must be non-negative and finite. A zero rate maps to log = -inf.
  static ParamVector from_values(Vector values);
  static ParamVector from_log(Vector log_values);

  const Vector& values() const noexcept { return values_; }
  const Vector& log_values() const noexcept { return log_values_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

 private:
  Vector values_;
  Vector log_values_;
};

using StateView = std::span<const double>;

/// h = c[rate] * prod_j binom(x_j, p_ij).
struct MassActionHazard {
  int rate_index = 0;
};

/// Time-varying rate b0 * exp(-b1 * (t - b2)^2) + b3, independent of state.
/// Fields are indices into the parameter vector.
struct PulseHazard {
  int amplitude = 0;
  int width = 0;
  int centre = 0;
  int baseline = 0;
};

/// Programmatic hazard. `bound` must dominate `rate` over [t0, t1] at a
/// fixed state; when absent the hazard is treated as time-homogeneous.
struct CustomHazard {
  std::function<double(StateView x, const ParamVector& c, double t)> rate;
  std::function<double(StateView x, const ParamVector& c, double t0, double t1)> bound;
  std::function<void(StateView x, const ParamVector& c, double t, std::span<double> grad)> gradient;
  bool time_dependent = false;
};

using HazardKind = std::variant<MassActionHazard, PulseHazard, CustomHazard>;

struct Reaction {
  std::string name;
  std::vector<int> reactants;  // length u, p_i.
  std::vector<int> products;   // length u, q_i.
  HazardKind hazard;
};

class ReactionNetwork {
 public:
  ReactionNetwork() = default;
  ReactionNetwork(std::vector<std::string> species, std::vector<std::string> params,
                  std::vector<Reaction> reactions);

  int num_species() const noexcept { return static_cast<int>(species_.size()); }
  int num_reactions() const noexcept { return static_cast<int>(reactions_.size()); }
  int num_params() const noexcept { return static_cast<int>(params_.size()); }

  /// u x v, S = (Q - P)'.
  const IntMatrix& stoich() const noexcept { return stoich_; }
  /// v x u.
  const IntMatrix& reactant_coeffs() const noexcept { return reactant_; }
  const IntMatrix& product_coeffs() const noexcept { return product_; }
  const Matrix& stoich_real() const noexcept { return stoich_real_; }

  const std::vector<std::string>& species_names() const noexcept { return species_; }
  const std::vector<std::string>& param_names() const noexcept { return params_; }
  const std::vector<Reaction>& reactions() const noexcept { return reactions_; }

  bool time_dependent() const noexcept { return time_dependent_; }
  bool has_analytic_jacobian() const noexcept { return analytic_jacobian_; }
  bool serializable() const noexcept;

  /// Writes the v hazards into `h`. Throws std::domain_error on a negative
  /// state component.
  void hazards_into(StateView x, const ParamVector& c, double t, std::span<double> h) const;

  /// Upper bound on hazard i over [t0, t1] with the state held fixed.
  double hazard_bound(int i, StateView x, const ParamVector& c, double t0, double t1) const;

  /// Gradient of hazard i with respect to the state. Requires has_analytic_jacobian().
  void hazard_gradient(int i, StateView x, const ParamVector& c, double t, std::span<double> grad) const;

 private:
  double hazard_one(int i, StateView x, const ParamVector& c, double t) const;

  std::vector<std::string> species_;
  std::vector<std::string> params_;
  std::vector<Reaction> reactions_;
  IntMatrix stoich_;
  IntMatrix reactant_;
  IntMatrix product_;
  Matrix stoich_real_;
  bool time_dependent_ = false;
  bool analytic_jacobian_ = true;
  // Per reaction: rate index for mass-action (-1 otherwise) and its
  // nonzero (species, coefficient) reactant terms.
  std::vector<int> mass_rate_;
  std::vector<std::vector<std::pair<int, int>>> terms_;
};

Vector hazards(const ReactionNetwork& net, const Vector& x, const ParamVector& c, double t);

double total_hazard(const Vector& h);

/// Jacobian of the drift S h(z) with respect to z. Analytic when every
/// hazard supplies a state gradient, else jacobian_fd.
Matrix jacobian(const ReactionNetwork& net, const Vector& z, const ParamVector& c, double t);

/// Central differences with step max(1e-6, 1e-6 |z_j|); one-sided where the
/// backward point would leave the non-negative orthant.
Matrix jacobian_fd(const ReactionNetwork& net, const Vector& z, const ParamVector& c, double t);

/// binom(x, p) continued to real x via the falling factorial, clamped at 0.
double binomial_real(double x, int p) noexcept;

}  // namespace skinf
