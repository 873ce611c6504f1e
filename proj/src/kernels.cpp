#include "karman/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace karman {

namespace {
constexpr double kPi = std::numbers::pi;
}

SQGParams coupling_constants(double s) {
  if (!(s > 0.0) || !(s <= 1.0 + kUnitExponentSnap))
    throw DomainError("exponent s=" + std::to_string(s) + " outside (0,1]");
  SQGParams p;
  if (std::abs(s - 1.0) < kUnitExponentSnap) {
    p.s = 1.0;
    p.c_s = 1.0 / (2.0 * kPi);
    p.calC_s = 1.0 / (2.0 * kPi);
    p.bigC_s = NAN;
    p.log_kernel = true;
    return p;
  }
  p.s = s;
  p.log_kernel = false;
  const double four_s = std::pow(4.0, s);
  p.c_s = std::tgamma(1.0 - s) / (four_s * kPi * std::tgamma(s));
  // (2-2s) Gamma(1-s) = 2 Gamma(2-s)
  p.calC_s = 2.0 * std::tgamma(2.0 - s) / (four_s * kPi * std::tgamma(s));
  p.bigC_s = four_s * std::tgamma(1.0 + s) / (kPi * std::abs(std::tgamma(-s)));
  return p;
}

double green_kernel(const SQGParams &params, Vec2 x) {
  double r2 = norm2(x);
  if (r2 == 0.0)
    throw SingularityError("Green kernel evaluated at the origin");
  if (params.log_kernel)
    return -std::log(r2) / (4.0 * kPi);
  return params.c_s * std::pow(r2, params.s - 1.0);
}

Vec2 green_gradient(const SQGParams &params, Vec2 x) {
  double r2 = norm2(x);
  if (r2 == 0.0)
    throw SingularityError("Green kernel gradient evaluated at the origin");
  double f = params.log_kernel ? -1.0 / (2.0 * kPi * r2)
                               : params.c_s * (2.0 * params.s - 2.0) * std::pow(r2, params.s - 2.0);
  return f * x;
}

double green_shift_difference(const SQGParams &params, Vec2 y, Vec2 z, double h) {
  Vec2 a{y.x1, y.x2 + h}, b{z.x1, z.x2 + h};
  double nb = norm2(b);
  if (nb == 0.0 || norm2(a) == 0.0)
    throw SingularityError("Green difference evaluated at a singular point");
  double d = (norm2(y) - norm2(z)) + 2.0 * h * (y.x2 - z.x2);
  double rel = d / nb;
  if (params.log_kernel)
    return -std::log1p(rel) / (4.0 * kPi);
  double beta = params.s - 1.0;
  return params.c_s * std::pow(nb, beta) * std::expm1(beta * std::log1p(rel));
}

bool on_lattice(Vec2 y, double l) {
  if (std::abs(y.x1) > 1e-14 * (1.0 + l))
    return false;
  double q = y.x2 / l;
  return std::abs(q - std::nearbyint(q)) < 1e-13;
}

LatticeSum pair_periodic_green(const SQGParams &params, double l, Vec2 x, Vec2 p,
                               Vec2 q, const LatticeSumPolicy &policy) {
  if (!(l > 0.0))
    throw DomainError("period l must be positive");
  if (on_lattice(p - q, l))
    throw DomainError("pair_periodic_green: p and q coincide modulo the lattice");
  Vec2 y = x - p, z = x - q;
  if (on_lattice(y, l) || on_lattice(z, l))
    throw SingularityError("pair_periodic_green evaluated at a lattice image of p or q");
  double zero = green_shift_difference(params, y, z, 0.0);
  auto term = [&](long k) {
    double h = k * l;
    return green_shift_difference(params, y, z, h) + green_shift_difference(params, y, z, -h);
  };
  LatticeSum r = sum_series(term, 4.0 - 2.0 * params.s,
                            policy_for_extent(policy, (norm(y) + norm(z)) / l));
  r.value += zero;
  return r;
}

LatticeSum hypersingular_kernel_J(const SQGParams &params, double l, Vec2 x,
                                  const LatticeSumPolicy &policy) {
  if (params.log_kernel)
    throw DomainError("hypersingular kernel J_s is defined only for s < 1");
  if (!(l > 0.0))
    throw DomainError("period l must be positive");
  if (on_lattice(x, l))
    throw SingularityError("J_s evaluated on the lattice");
  const double e = -1.0 - params.s;
  auto g = [&](double h) { return std::pow(x.x1 * x.x1 + (x.x2 + h) * (x.x2 + h), e); };
  auto term = [&](long k) { return params.bigC_s * (g(k * l) + g(-k * l)); };
  LatticeSum r = sum_series(term, 2.0 + 2.0 * params.s, policy_for_extent(policy, norm(x) / l));
  r.value += params.bigC_s * g(0.0);
  return r;
}

} // namespace karman
