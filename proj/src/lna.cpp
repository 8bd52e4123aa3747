#include "skinf/lna.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

namespace skinf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

class MomentSystem {
 public:
  MomentSystem(const ReactionNetwork& net, const ParamVector& c, bool with_mean)
      : net_(net), c_(c), u_(net.num_species()), with_mean_(with_mean) {}

  Eigen::Index size() const { return u_ + u_ * u_ + (with_mean_ ? u_ : 0); }

  void rhs(double t, const Vector& y, Vector& dy) const {
    const Vector z = y.head(u_).cwiseMax(0.0);
    const Eigen::Map<const Matrix> V(y.data() + u_, u_, u_);
    const Vector h = hazards(net_, z, c_, t);
    const Matrix& S = net_.stoich_real();
    const Matrix F = jacobian(net_, z, c_, t);
    dy.resize(size());
    dy.head(u_) = S * h;
    Eigen::Map<Matrix> dV(dy.data() + u_, u_, u_);
    dV = V * F.transpose() + S * h.asDiagonal() * S.transpose() + F * V;
    if (with_mean_) {
      const Eigen::Map<const Vector> m(y.data() + u_ + u_ * u_, u_);
      dy.tail(u_) = F * m;
    }
  }

 private:
  const ReactionNetwork& net_;
  const ParamVector& c_;
  Eigen::Index u_;
  bool with_mean_;
};

double error_norm(const Vector& err, const Vector& y0, const Vector& y1, const OdeTolerances& tol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = tol.atol + tol.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

void integrate(const MomentSystem& sys, double t0, double t1, Vector& y, const OdeTolerances& tol) {
  if (t1 == t0) return;
  const Eigen::Index n = sys.size();
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
  sys.rhs(t0, y, k1);

  // Initial step from the scaled size of y and f.
  double d0 = 0.0, d1 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = tol.atol + tol.rtol * std::abs(y[i]);
    d0 += (y[i] / sc) * (y[i] / sc);
    d1 += (k1[i] / sc) * (k1[i] / sc);
  }
  d0 = std::sqrt(d0 / n);
  d1 = std::sqrt(d1 / n);
  const double span = t1 - t0;
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h = std::min(std::max(h, 1e-6 * span), span);

  double t = t0;
  long steps = 0;
  while (t < t1) {
    if (++steps > tol.max_steps)
      throw LnaIntegrationError("integrate_moments: step budget exhausted at t=" + std::to_string(t), t);
    const bool last = t + h >= t1;
    if (last) h = t1 - t;
    ytmp = y + h * a21 * k1;
    sys.rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    sys.rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    sys.rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    sys.rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    sys.rhs(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    sys.rhs(t + h, ynew, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, y, ynew, tol);
    if (!std::isfinite(en))
      throw LnaIntegrationError("integrate_moments: non-finite state at t=" + std::to_string(t), t);
    if (en <= 1.0) {
      t = last ? t1 : t + h;
      y = ynew;
      k1 = k7;
    }
    const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    h *= (en <= 1.0) ? factor : std::min(1.0, factor);
    if (t < t1 && h < 1e-12 * std::max(1.0, std::abs(t)))
      throw LnaIntegrationError("integrate_moments: step size underflow at t=" + std::to_string(t), t);
  }
}

struct Forecast {
  double log_density = 0.0;
  bool degenerate = false;  // zero forecast covariance, consistent observation
  Eigen::LLT<Matrix> llt;
};

std::optional<Forecast> factor_forecast(const Vector& resid, const Vector& y, const Matrix& cov) {
  Forecast f;
  if (cov.cwiseAbs().maxCoeff() == 0.0) {
    for (Eigen::Index k = 0; k < resid.size(); ++k)
      if (std::abs(resid[k]) > 1e-9 * (1.0 + std::abs(y[k]))) return std::nullopt;
    f.degenerate = true;
    return f;
  }
  const auto p = resid.size();
  for (double jitter : {0.0, 1e-10, 1e-8}) {
    Matrix m = cov;
    m.diagonal().array() += jitter;
    f.llt.compute(m);
    if (f.llt.info() != Eigen::Success) continue;
    const Matrix L = f.llt.matrixL();
    double logdet = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) logdet += 2.0 * std::log(L(k, k));
    const Vector w = f.llt.matrixL().solve(resid);
    f.log_density = -0.5 * (static_cast<double>(p) * std::log(2.0 * std::numbers::pi) + logdet + w.squaredNorm());
    return f;
  }
  return std::nullopt;
}

Matrix observation_noise(const ObservationModel& obs, const ParamVector& c, const Vector& forecast_mean) {
  if (obs.kind == ObservationKind::Poisson) {
    // Variance proxy from the deterministic path, floored away from zero.
    return forecast_mean.cwiseMax(1e-6).asDiagonal();
  }
  return obs.noise_covariance(c);
}

}  // namespace

LnaBelief LnaBelief::at_known_state(double t, const Vector& x) {
  const auto u = x.size();
  LnaBelief b;
  b.t = t;
  b.z = x;
  b.a = x;
  b.m = Vector::Zero(u);
  b.V = Matrix::Zero(u, u);
  b.C = Matrix::Zero(u, u);
  return b;
}

LnaBelief integrate_moments(const ReactionNetwork& net, const LnaBelief& belief, const ParamVector& c, double t_end,
                            const OdeTolerances& tol) {
  const Eigen::Index u = net.num_species();
  if (belief.z.size() != u || belief.V.rows() != u || belief.V.cols() != u)
    throw std::invalid_argument("integrate_moments: belief has wrong dimension");
  if (t_end < belief.t) throw std::invalid_argument("integrate_moments: t_end before belief time");
  const bool with_mean = belief.m.size() == u && !belief.m.isZero(0.0);
  MomentSystem sys(net, c, with_mean);
  Vector y(sys.size());
  y.head(u) = belief.z;
  Eigen::Map<Matrix>(y.data() + u, u, u) = belief.V;
  if (with_mean) y.tail(u) = belief.m;

  integrate(sys, belief.t, t_end, y, tol);

  LnaBelief out = belief;
  out.t = t_end;
  out.z = y.head(u);
  const Matrix V = Eigen::Map<const Matrix>(y.data() + u, u, u);
  out.V = 0.5 * (V + V.transpose());
  out.m = with_mean ? Vector(y.tail(u)) : Vector::Zero(u);
  return out;
}

double lna_log_marginal(const ReactionNetwork& net, const ObservationModel& obs, const ObservationSeries& data,
                        const ParamVector& c, const Vector& x1, const OdeTolerances& tol,
                        std::vector<LnaStep>* trace) {
  const auto u = net.num_species();
  if (x1.size() != u) throw std::invalid_argument("lna_log_marginal: x1 has wrong dimension");
  if (obs.num_species() != u) throw std::invalid_argument("lna_log_marginal: observation model dimension mismatch");
  if (data.size() == 0) throw std::invalid_argument("lna_log_marginal: no data");
  const Matrix& G = obs.G;

  LnaBelief b = LnaBelief::at_known_state(data.times[0], x1);
  double total = 0.0;

  for (std::size_t k = 0; k < data.size(); ++k) {
    if (k > 0) {
      b.z = b.a;
      b.m.setZero();
      b.V = b.C;
      try {
        b = integrate_moments(net, b, c, data.times[k], tol);
      } catch (const LnaIntegrationError&) {
        return kNegInf;
      }
      if (!b.m.isZero(0.0)) throw std::logic_error("lna_log_marginal: residual mean drifted from zero");
    }
    // At k == 0 the prior is the known state: z = a = x1, V = C = 0.
    const Vector fmean = G.transpose() * b.z;
    const Matrix fcov = G.transpose() * b.V * G + observation_noise(obs, c, fmean);
    const Vector resid = data.values[k] - fmean;
    const auto f = factor_forecast(resid, data.values[k], fcov);
    if (!f) return kNegInf;
    if (f->degenerate) {
      b.a = b.z;
      b.C = b.V;
    } else {
      const Matrix VG = b.V * G;
      b.a = b.z + VG * f->llt.solve(resid);
      const Matrix C = b.V - VG * f->llt.solve(VG.transpose());
      b.C = 0.5 * (C + C.transpose());
      total += f->log_density;
    }
    if (trace) {
      trace->push_back({b.t, b.z, b.V, fmean, fcov, b.a, b.C, f->degenerate ? 0.0 : f->log_density});
    }
    if (!std::isfinite(total)) return kNegInf;
  }
  return total;
}

double temper(double log_p, double tau) {
  if (!(tau >= 1.0)) throw std::invalid_argument("temper: tau must be >= 1");
  return log_p / tau;
}

}  // namespace skinf
