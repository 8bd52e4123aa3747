#include "skinf/cle.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace skinf {

namespace {

Vector clamp_nonneg(const Vector& x) { return x.cwiseMax(0.0); }

}  // namespace

Matrix cle_diffusion_matrix(const ReactionNetwork& net, const Vector& x, const ParamVector& c, double t) {
  const Vector h = hazards(net, clamp_nonneg(x), c, t);
  const Matrix& S = net.stoich_real();
  return S * h.asDiagonal() * S.transpose();
}

Matrix psd_sqrt(const Matrix& D) {
  const auto u = D.rows();
  for (Eigen::Index i = 0; i < u; ++i) {
    if (D(i, i) < 0.0 || !std::isfinite(D(i, i))) throw std::runtime_error("psd_sqrt: matrix is not PSD");
  }
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < u; ++i)
    if (D(i, i) > 0.0) active.push_back(i);
  Matrix L = Matrix::Zero(u, u);
  if (active.empty()) return L;
  const auto k = static_cast<Eigen::Index>(active.size());
  Matrix sub(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = D(active[a], active[b]);
  for (double jitter : {0.0, 1e-10, 1e-8, 1e-6}) {
    Matrix m = sub;
    m.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) continue;
    const Matrix lk = llt.matrixL();
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b <= a; ++b) L(active[a], active[b]) = lk(a, b);
    return L;
  }
  throw std::runtime_error("psd_sqrt: Cholesky failed after jitter escalation");
}

DiffusionState em_step(const ReactionNetwork& net, const DiffusionState& s, const ParamVector& c, double dt,
                       const Vector& noise) {
  if (!(dt > 0.0)) throw std::invalid_argument("em_step: dt must be positive");
  const Vector xc = clamp_nonneg(s.x);
  const Vector h = hazards(net, xc, c, s.t);
  const Matrix& S = net.stoich_real();
  const Matrix D = S * h.asDiagonal() * S.transpose();
  const Matrix L = psd_sqrt(D);
  DiffusionState out;
  out.t = s.t + dt;
  out.x = s.x + S * h * dt + L * (std::sqrt(dt) * noise);
  return out;
}

int cle_substeps(double t0, double t1, double dt_max) {
  if (!(t1 > t0)) throw std::invalid_argument("cle: require t1 > t0");
  if (!(dt_max > 0.0)) throw std::invalid_argument("cle: dt_max must be positive");
  // Tolerance keeps 1 / 0.2 from rounding up to 6 substeps.
  const double ratio = (t1 - t0) / dt_max;
  return std::max(1, static_cast<int>(std::ceil(ratio - 1e-9)));
}

DiffusionState cle_simulate(const ReactionNetwork& net, const Vector& x0, const ParamVector& c, double t0, double t1,
                            double dt_max, Rng& rng) {
  const int n = cle_substeps(t0, t1, dt_max);
  const double dt = (t1 - t0) / n;
  std::normal_distribution<double> normal(0.0, 1.0);
  DiffusionState s{t0, x0};
  Vector noise(net.num_species());
  for (int k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < noise.size(); ++j) noise[j] = normal(rng);
    s = em_step(net, s, c, dt, noise);
    s.t = t0 + (k + 1) * dt;
  }
  s.t = t1;
  return s;
}

}  // namespace skinf
