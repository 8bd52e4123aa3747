#pragma once

#include <Eigen/Dense>

#include <vector>

namespace skinf {

/// Independent prior on one parameter, evaluated on the log scale the chain
/// moves in. Natural-scale densities (Gamma, Exponential) carry the
/// Jacobian factor c = exp(theta); LogUniform is stated directly on log c.
struct PriorComponent {
  enum class Kind { LogUniform, Gamma, Exponential };

  Kind kind = Kind::LogUniform;
  double a = 0.0;  // LogUniform: lower bound on log c; Gamma: shape; Exponential: rate
  double b = 0.0;  // LogUniform: upper bound on log c; Gamma: rate

  static PriorComponent log_uniform(double lower, double upper);
  static PriorComponent gamma(double shape, double rate);
  static PriorComponent exponential(double rate);

  double log_density(double log_c) const;
  bool operator==(const PriorComponent&) const = default;
};

class Prior {
 public:
  Prior() = default;
  explicit Prior(std::vector<PriorComponent> components);

  /// Sum of component log-densities; -inf outside the support.
  double log_density(const Eigen::VectorXd& log_c) const;
  int size() const noexcept { return static_cast<int>(components_.size()); }
  const std::vector<PriorComponent>& components() const noexcept { return components_; }

  bool operator==(const Prior&) const = default;

 private:
  std::vector<PriorComponent> components_;
};

}  // namespace skinf
