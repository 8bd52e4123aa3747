#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace skinf {

/// Normalized autocorrelation at lags 0..n-1 (biased estimator, via FFT).
std::vector<double> autocorrelation(std::span<const double> x);

/// n / (1 + 2 sum rho_k), with the sum truncated by Geyer's initial
/// positive sequence: pairs rho_{2m} + rho_{2m+1} are summed while positive.
/// A constant chain returns 1. Requires n >= 10.
double ess(std::span<const double> chain);

Eigen::VectorXd ess_columns(const Eigen::MatrixXd& samples);

double mean(std::span<const double> x);
double sample_variance(std::span<const double> x);

/// Linear-interpolated empirical quantile, q in [0, 1].
double quantile(std::vector<double> x, double q);

struct DensityGrid {
  std::vector<double> grid;
  std::vector<double> density;
};

/// Gaussian kernel density estimate with Silverman's bandwidth.
DensityGrid kernel_density(std::span<const double> x, int points = 256);

/// Mode of the kernel density estimate.
double kde_mode(std::span<const double> x, int points = 512);

}  // namespace skinf
