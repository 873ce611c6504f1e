#pragma once

#include "karman/lattice.hpp"
#include "karman/vec2.hpp"

namespace karman {

/// Kernel family of the gSQG operator (-Delta)^s.
struct SQGParams {
  double s = 1.0;
  double c_s = 0.0;    // Green constant; coefficient of ln(1/|x|) when s = 1
  double calC_s = 0.0; // dynamic constant
  double bigC_s = 0.0; // hypersingular constant, NaN at s = 1
  bool log_kernel = true;
};

inline constexpr double kUnitExponentSnap = 1e-9;

SQGParams coupling_constants(double s);

/// G_s(x): c_s |x|^{2s-2}, or (1/2pi) ln(1/|x|) for s = 1.
double green_kernel(const SQGParams &params, Vec2 x);

/// grad G_s(x).
Vec2 green_gradient(const SQGParams &params, Vec2 x);

/// G_s(y + h e2) - G_s(z + h e2) without cancellation when h is large.
double green_shift_difference(const SQGParams &params, Vec2 y, Vec2 z, double h);

/// sum_k [G_s(x-p+kl e2) - G_s(x-q+kl e2)], summed in symmetric pairs.
LatticeSum pair_periodic_green(const SQGParams &params, double l, Vec2 x, Vec2 p,
                               Vec2 q, const LatticeSumPolicy &policy);

/// J_s(x) = sum_k C_s |x+kl e2|^{-2-2s}, s < 1.
LatticeSum hypersingular_kernel_J(const SQGParams &params, double l, Vec2 x,
                                  const LatticeSumPolicy &policy);

/// True when y lies on {k l e2}.
bool on_lattice(Vec2 y, double l);

} // namespace karman
