// Independent reference computations shared by the test suites. Nothing in
// here calls the library's integrators or filters.
#pragma once

#include "skinf/network.hpp"
#include "skinf/random.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace testsupport {

using skinf::Matrix;
using skinf::Vector;

inline skinf::ReactionNetwork immigration_death() {
  using namespace skinf;
  return ReactionNetwork({"X"}, {"kappa", "gamma"},
                         {Reaction{"immigration", {0}, {1}, MassActionHazard{0}},
                          Reaction{"death", {1}, {0}, MassActionHazard{1}}});
}

inline skinf::ReactionNetwork pure_death() {
  using namespace skinf;
  return ReactionNetwork({"X"}, {"c"}, {Reaction{"death", {1}, {0}, MassActionHazard{0}}});
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

/// Generator of the immigration-death chain on {0..M}; immigration is
/// switched off at M so rows sum to zero.
inline Matrix immigration_death_generator(double kappa, double gamma, int M) {
  Matrix Q = Matrix::Zero(M + 1, M + 1);
  for (int x = 0; x <= M; ++x) {
    if (x < M) Q(x, x + 1) = kappa;
    if (x > 0) Q(x, x - 1) = gamma * x;
    Q(x, x) = -Q.row(x).sum();
  }
  return Q;
}

inline double normal_log_pdf(double y, double mu, double sd) {
  const double r = (y - mu) / sd;
  return -0.5 * r * r - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// Exact forward-filter likelihood of Gaussian observations of a truncated
/// immigration-death chain started at a known x1 at times[0].
inline double cme_gaussian_log_likelihood(double kappa, double gamma, int M, int x1, double sd,
                                          const std::vector<double>& times, const std::vector<double>& ys) {
  const Matrix Q = immigration_death_generator(kappa, gamma, M);
  double loglik = normal_log_pdf(ys[0], x1, sd);
  Eigen::RowVectorXd alpha = Eigen::RowVectorXd::Zero(M + 1);
  alpha[x1] = 1.0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const Matrix P = (Q * (times[k] - times[k - 1])).exp();
    alpha = alpha * P;
    double lk = 0.0;
    for (int x = 0; x <= M; ++x) {
      alpha[x] *= std::exp(normal_log_pdf(ys[k], x, sd));
      lk += alpha[x];
    }
    alpha /= lk;
    loglik += std::log(lk);
  }
  return loglik;
}

/// Moments of a network with affine hazards h(z) = H z + h0 after time dt,
/// from one matrix exponential of the augmented linear system in
/// (z, vec V, 1).
struct LinearMoments {
  Vector z;
  Matrix V;
};

inline LinearMoments affine_lna_moments(const Matrix& S, const Matrix& H, const Vector& h0, const Vector& z0,
                                        const Matrix& V0, double dt) {
  const auto u = S.rows();
  const Matrix F = S * H;
  const Eigen::Index n = u + u * u + 1;
  Matrix A = Matrix::Zero(n, n);
  A.block(0, 0, u, u) = F;
  A.block(0, n - 1, u, 1) = S * h0;
  const Matrix I = Matrix::Identity(u, u);
  Matrix K = Matrix::Zero(u * u, u * u);
  // vec(F V) = (I kron F) vec V, vec(V F') = (F kron I) vec V, column-major.
  for (Eigen::Index a = 0; a < u; ++a)
    for (Eigen::Index b = 0; b < u; ++b) {
      K.block(a * u, b * u, u, u) += I(a, b) * F;
      K.block(a * u, b * u, u, u) += F(a, b) * I;
    }
  A.block(u, u, u * u, u * u) = K;
  for (Eigen::Index j = 0; j < u; ++j) {
    const Matrix D = S * H.col(j).asDiagonal() * S.transpose();
    A.block(u, j, u * u, 1) = Eigen::Map<const Vector>(D.data(), u * u);
  }
  const Matrix D0 = S * h0.asDiagonal() * S.transpose();
  A.block(u, n - 1, u * u, 1) = Eigen::Map<const Vector>(D0.data(), u * u);

  Vector w(n);
  w.head(u) = z0;
  w.segment(u, u * u) = Eigen::Map<const Vector>(V0.data(), u * u);
  w[n - 1] = 1.0;
  const Vector out = (A * dt).exp() * w;
  LinearMoments m;
  m.z = out.head(u);
  m.V = Eigen::Map<const Matrix>(out.segment(u, u * u).data(), u, u);
  m.V = 0.5 * (m.V + m.V.transpose());
  return m;
}

inline double mvn_log_pdf(const Vector& r, const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  const Vector s = llt.matrixL().solve(r);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < cov.rows(); ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * s.squaredNorm() - 0.5 * logdet - 0.5 * static_cast<double>(r.size()) * std::log(2.0 * std::numbers::pi);
}

/// Restarting Kalman filter over the affine moments above.
inline double affine_lna_log_likelihood(const Matrix& S, const Matrix& H, const Vector& h0, const Matrix& G,
                                        const Matrix& Sigma, const Vector& x1, const std::vector<double>& times,
                                        const std::vector<Vector>& ys) {
  const auto u = S.rows();
  Vector a = x1;
  Matrix C = Matrix::Zero(u, u);
  double ll = mvn_log_pdf(ys[0] - G.transpose() * x1, Sigma);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const auto m = affine_lna_moments(S, H, h0, a, C, times[k] - times[k - 1]);
    const Matrix Q = G.transpose() * m.V * G + Sigma;
    const Vector r = ys[k] - G.transpose() * m.z;
    ll += mvn_log_pdf(r, Q);
    const Matrix K = m.V * G * Q.inverse();
    a = m.z + K * r;
    C = m.V - K * G.transpose() * m.V;
  }
  return ll;
}

/// First-reaction simulation of the gene-expression model. The transcription
/// clock is advanced by inverting its integrated hazard, which has a closed
/// form through erf.
struct GeneParams {
  double gR, gP, kP, b0, b1, b2, b3;
};

inline double integrated_pulse(const GeneParams& p, double t, double tau) {
  if (p.b1 == 0.0) return (p.b0 + p.b3) * tau;
  const double s = std::sqrt(p.b1);
  return p.b3 * tau + p.b0 * std::sqrt(std::numbers::pi) / (2.0 * s) *
                          (std::erf(s * (t + tau - p.b2)) - std::erf(s * (t - p.b2)));
}

inline Vector gene_first_reaction(const GeneParams& p, Vector x, double t0, double t1, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  double t = t0;
  for (;;) {
    const double rates[3] = {p.gR * x[0], p.kP * x[0], p.gP * x[1]};
    double best = std::numeric_limits<double>::infinity();
    int which = -1;
    for (int i = 0; i < 3; ++i) {
      if (rates[i] <= 0.0) continue;
      const double tau = expo(rng) / rates[i];
      if (tau < best) { best = tau; which = i + 1; }
    }
    // Transcription: solve integrated_pulse(t, tau) = E by bisection.
    const double e = expo(rng);
    const double horizon = std::min(best, t1 - t);
    if (integrated_pulse(p, t, horizon) >= e) {
      double lo = 0.0, hi = horizon;
      for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        (integrated_pulse(p, t, mid) < e ? lo : hi) = mid;
      }
      best = 0.5 * (lo + hi);
      which = 0;
    }
    if (which < 0 || t + best > t1) return x;
    t += best;
    switch (which) {
      case 0: x[0] += 1; break;
      case 1: x[0] -= 1; break;
      case 2: x[1] += 1; break;
      case 3: x[1] -= 1; break;
    }
  }
}

/// Two-sample Kolmogorov-Smirnov p-value (asymptotic distribution).
inline double ks_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  const double lambda = (en + 0.12 + 0.11 / en) * d;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) q += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(q, 0.0, 1.0);
}

inline double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace testsupport
