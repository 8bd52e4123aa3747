#include "skinf/diagnostics.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace skinf {

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean: empty input");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("sample_variance: need two values");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

std::vector<double> autocorrelation(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  const double m = mean(x);
  std::size_t len = 1;
  while (len < 2 * n) len <<= 1;
  std::vector<double> padded(len, 0.0);
  for (std::size_t i = 0; i < n; ++i) padded[i] = x[i] - m;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, padded);
  for (auto& s : spec) s = std::complex<double>(std::norm(s), 0.0);
  std::vector<double> acov;
  fft.inv(acov, spec);
  std::vector<double> rho(n, 0.0);
  const double c0 = acov[0];
  if (!(c0 > 0.0)) {
    rho[0] = 1.0;
    return rho;
  }
  for (std::size_t k = 0; k < n; ++k) rho[k] = acov[k] / c0;
  return rho;
}

double ess(std::span<const double> chain) {
  const std::size_t n = chain.size();
  if (n < 10) throw std::invalid_argument("ess: chain must have at least 10 values");
  const auto [lo, hi] = std::minmax_element(chain.begin(), chain.end());
  if (*lo == *hi) return 1.0;
  const auto rho = autocorrelation(chain);
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double pair = rho[2 * m] + rho[2 * m + 1];
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return static_cast<double>(n) / tau;
}

Eigen::VectorXd ess_columns(const Eigen::MatrixXd& samples) {
  Eigen::VectorXd out(samples.cols());
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    const Eigen::VectorXd col = samples.col(j);
    out[j] = col.size() >= 10 ? ess({col.data(), static_cast<std::size_t>(col.size())}) : 0.0;
  }
  return out;
}

double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw std::invalid_argument("quantile: empty input");
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= x.size()) return x.back();
  const double f = pos - static_cast<double>(i);
  return x[i] * (1.0 - f) + x[i + 1] * f;
}

DensityGrid kernel_density(std::span<const double> x, int points) {
  if (x.size() < 2) throw std::invalid_argument("kernel_density: need two values");
  const double sd = std::sqrt(sample_variance(x));
  std::vector<double> v(x.begin(), x.end());
  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd > 0.0 ? sd : 1.0;
  const double bw = 0.9 * spread * std::pow(static_cast<double>(x.size()), -0.2);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double a = *lo - 3.0 * bw;
  const double b = *hi + 3.0 * bw;
  DensityGrid out;
  out.grid.resize(static_cast<std::size_t>(points));
  out.density.assign(static_cast<std::size_t>(points), 0.0);
  const double norm = 1.0 / (static_cast<double>(x.size()) * bw * std::sqrt(2.0 * std::numbers::pi));
  for (int g = 0; g < points; ++g) {
    const double t = a + (b - a) * g / (points - 1);
    double s = 0.0;
    for (double xi : x) {
      const double r = (t - xi) / bw;
      s += std::exp(-0.5 * r * r);
    }
    out.grid[static_cast<std::size_t>(g)] = t;
    out.density[static_cast<std::size_t>(g)] = s * norm;
  }
  return out;
}

double kde_mode(std::span<const double> x, int points) {
  const auto d = kernel_density(x, points);
  const auto it = std::max_element(d.density.begin(), d.density.end());
  return d.grid[static_cast<std::size_t>(it - d.density.begin())];
}

}  // namespace skinf
