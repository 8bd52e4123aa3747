#pragma once

#include "skinf/network.hpp"

#include <optional>
#include <vector>

namespace skinf {

enum class ObservationKind { LinearGaussian, Poisson, Exact };

/// Y_t = G' X_t + eps_t. For LinearGaussian the noise covariance is either
/// fixed or diag(c[sd_param[k]]^2). Poisson observes G' X_t as a rate;
/// Exact has zero noise.
struct ObservationModel {
  ObservationKind kind = ObservationKind::LinearGaussian;
  Matrix G;                      // u x p
  Matrix noise_cov;              // p x p, fixed Sigma (LinearGaussian without sd_param)
  std::vector<int> sd_param;     // optional, one parameter index per observed component

  static ObservationModel gaussian(Matrix G, Matrix noise_cov);
  static ObservationModel gaussian_with_sd_params(Matrix G, std::vector<int> sd_param);
  static ObservationModel poisson(int num_species, std::vector<int> observed);
  static ObservationModel exact(Matrix G);

  int dim() const noexcept { return static_cast<int>(G.cols()); }
  int num_species() const noexcept { return static_cast<int>(G.rows()); }

  /// Sigma at parameters c (zero for Exact; Poisson has no fixed Sigma).
  Matrix noise_covariance(const ParamVector& c) const;

  void validate() const;
};

/// Observations y_1..y_T at increasing times.
struct ObservationSeries {
  std::vector<double> times;
  std::vector<Vector> values;

  std::size_t size() const noexcept { return times.size(); }
  void validate(const ObservationModel& obs) const;
};

/// log p(y | x, c). Exact returns 0 on G'x == y, -inf otherwise.
double obs_log_density(const ObservationModel& obs, const Vector& y, const Vector& x, const ParamVector& c);

/// Multivariate normal log-density through a Cholesky factor with the
/// diagonal jitter ladder {0, 1e-10, 1e-8}. Returns nullopt if the
/// covariance cannot be factorized.
std::optional<double> gaussian_log_density(const Vector& r, const Matrix& cov);

}  // namespace skinf
