#include "skinf/observation.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace skinf {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

ObservationModel ObservationModel::gaussian(Matrix G, Matrix noise_cov) {
  ObservationModel m;
  m.kind = ObservationKind::LinearGaussian;
  m.G = std::move(G);
  m.noise_cov = std::move(noise_cov);
  m.validate();
  return m;
}

ObservationModel ObservationModel::gaussian_with_sd_params(Matrix G, std::vector<int> sd_param) {
  ObservationModel m;
  m.kind = ObservationKind::LinearGaussian;
  m.G = std::move(G);
  m.sd_param = std::move(sd_param);
  m.validate();
  return m;
}

ObservationModel ObservationModel::poisson(int num_species, std::vector<int> observed) {
  ObservationModel m;
  m.kind = ObservationKind::Poisson;
  m.G = Matrix::Zero(num_species, static_cast<Eigen::Index>(observed.size()));
  for (std::size_t k = 0; k < observed.size(); ++k) {
    if (observed[k] < 0 || observed[k] >= num_species)
      throw std::invalid_argument("ObservationModel: observed species index out of range");
    m.G(observed[k], static_cast<Eigen::Index>(k)) = 1.0;
  }
  m.validate();
  return m;
}

ObservationModel ObservationModel::exact(Matrix G) {
  ObservationModel m;
  m.kind = ObservationKind::Exact;
  m.G = std::move(G);
  m.validate();
  return m;
}

void ObservationModel::validate() const {
  const auto p = G.cols();
  if (p < 1 || p > G.rows()) throw std::invalid_argument("ObservationModel: G must be u x p with 1 <= p <= u");
  Eigen::FullPivLU<Matrix> lu(G);
  if (lu.rank() != p) throw std::invalid_argument("ObservationModel: G must have full column rank");
  if (kind == ObservationKind::LinearGaussian) {
    if (sd_param.empty()) {
      if (noise_cov.rows() != p || noise_cov.cols() != p)
        throw std::invalid_argument("ObservationModel: noise covariance must be p x p");
    } else if (static_cast<Eigen::Index>(sd_param.size()) != p) {
      throw std::invalid_argument("ObservationModel: need one sd parameter per observed component");
    }
  }
}

Matrix ObservationModel::noise_covariance(const ParamVector& c) const {
  const auto p = G.cols();
  switch (kind) {
    case ObservationKind::LinearGaussian:
      if (sd_param.empty()) return noise_cov;
      {
        Matrix s = Matrix::Zero(p, p);
        for (Eigen::Index k = 0; k < p; ++k) {
          const double sd = c[sd_param[static_cast<std::size_t>(k)]];
          s(k, k) = sd * sd;
        }
        return s;
      }
    case ObservationKind::Poisson:
    case ObservationKind::Exact:
      break;
  }
  return Matrix::Zero(p, p);
}

void ObservationSeries::validate(const ObservationModel& obs) const {
  if (times.size() != values.size()) throw std::invalid_argument("ObservationSeries: times/values length mismatch");
  if (times.empty()) throw std::invalid_argument("ObservationSeries: no observations");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1]))
      throw std::invalid_argument("ObservationSeries: times must be strictly increasing");
    if (values[i].size() != obs.dim()) throw std::invalid_argument("ObservationSeries: observation dimension mismatch");
    if (obs.kind == ObservationKind::Poisson) {
      for (Eigen::Index k = 0; k < values[i].size(); ++k) {
        const double y = values[i][k];
        if (y < 0.0 || y != std::floor(y))
          throw std::invalid_argument("ObservationSeries: Poisson observations must be non-negative integers");
      }
    }
  }
}

std::optional<double> gaussian_log_density(const Vector& r, const Matrix& cov) {
  const auto p = r.size();
  for (double jitter : {0.0, 1e-10, 1e-8}) {
    Matrix a = cov;
    a.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) continue;
    const Matrix& L = llt.matrixL();
    bool ok = true;
    double logdet = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      if (!(L(k, k) > 0.0)) ok = false;
      logdet += 2.0 * std::log(L(k, k));
    }
    if (!ok) continue;
    const Vector w = llt.matrixL().solve(r);
    return -0.5 * (static_cast<double>(p) * std::log(2.0 * std::numbers::pi) + logdet + w.squaredNorm());
  }
  return std::nullopt;
}

double obs_log_density(const ObservationModel& obs, const Vector& y, const Vector& x, const ParamVector& c) {
  const Vector gx = obs.G.transpose() * x;
  switch (obs.kind) {
    case ObservationKind::LinearGaussian: {
      const auto lp = gaussian_log_density(y - gx, obs.noise_covariance(c));
      return lp ? *lp : kNegInf;
    }
    case ObservationKind::Poisson: {
      double lp = 0.0;
      for (Eigen::Index k = 0; k < y.size(); ++k) {
        const double rate = gx[k] > 0.0 ? gx[k] : 0.0;
        if (rate == 0.0) {
          if (y[k] != 0.0) return kNegInf;
          continue;
        }
        lp += y[k] * std::log(rate) - rate - std::lgamma(y[k] + 1.0);
      }
      return lp;
    }
    case ObservationKind::Exact:
      for (Eigen::Index k = 0; k < y.size(); ++k)
        if (std::abs(gx[k] - y[k]) > 1e-9 * (1.0 + std::abs(y[k]))) return kNegInf;
      return 0.0;
  }
  return kNegInf;
}

}  // namespace skinf
