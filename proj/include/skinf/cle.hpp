#pragma once

#include "skinf/network.hpp"
#include "skinf/random.hpp"

namespace skinf {

struct DiffusionState {
  double t = 0.0;
  Vector x;
};

/// S diag{h} S' evaluated at max(x, 0).
Matrix cle_diffusion_matrix(const ReactionNetwork& net, const Vector& x, const ParamVector& c, double t);

/// Lower-triangular L with L L' = D. Zero rows/columns are kept exactly zero;
/// the remaining block is factorized with jitter {0, 1e-10, 1e-8, 1e-6}.
/// Throws std::runtime_error if the ladder is exhausted.
Matrix psd_sqrt(const Matrix& D);

/// One Euler-Maruyama step: hazards at max(x, 0), state left unclamped.
DiffusionState em_step(const ReactionNetwork& net, const DiffusionState& s, const ParamVector& c, double dt,
                       const Vector& noise);

/// Number of equal substeps ceil((t1 - t0) / dt_max).
int cle_substeps(double t0, double t1, double dt_max);

DiffusionState cle_simulate(const ReactionNetwork& net, const Vector& x0, const ParamVector& c, double t0, double t1,
                            double dt_max, Rng& rng);

}  // namespace skinf
