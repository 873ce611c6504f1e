#include "karman/plasma.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "karman/errors.hpp"

namespace karman {

namespace {

using State = std::array<double, 3>; // V, V', int_0^r rho V_+^gamma

struct LaneEmden {
  double gamma;
  void operator()(const State &y, State &dy, double r) const {
    double vp = std::pow(std::max(y[0], 0.0), gamma);
    dy[0] = y[1];
    dy[1] = -vp - y[1] / r;
    dy[2] = r * vp;
  }
};

constexpr double r_start = 1e-6;

State series_start(double a, double gamma) {
  double ag = std::pow(a, gamma);
  double r2 = r_start * r_start;
  return {a - ag * r2 / 4.0, -ag * r_start / 2.0, ag * r2 / 2.0};
}

State integrate_to(double a, double gamma, double r_end, double tol) {
  namespace ode = boost::numeric::odeint;
  State y = series_start(a, gamma);
  auto stepper = ode::make_dense_output(tol, tol, ode::runge_kutta_dopri5<State>());
  ode::integrate_adaptive(stepper, LaneEmden{gamma}, y, r_start, r_end, 1e-4);
  return y;
}

} // namespace

RadialProfile solve_plasma_dirichlet(double gamma, double tolerance, int output_cells) {
  if (!(gamma > 1.0))
    throw DomainError("Dirichlet plasma problem requires gamma > 1");
  if (output_cells < 16)
    throw DomainError("Dirichlet plasma: output_cells must be >= 16");
  const double tol = std::min(1e-10, tolerance * 1e-1);

  // scaling V_a(r) = a W(a^{(gamma-1)/2} r): the first zero of the a = 1 solution
  // fixes the shooting bracket
  auto g = [&](double a) { return integrate_to(a, gamma, 1.0, tol)[0]; };
  double lo = 1.0, hi = 2.0;
  int guard = 0;
  while (g(lo) <= 0.0) {
    lo *= 0.5;
    if (++guard > 200)
      throw ConvergenceError("Dirichlet plasma: no lower bracket", g(lo));
  }
  guard = 0;
  while (g(hi) >= 0.0) {
    hi *= 2.0;
    if (++guard > 200)
      throw ConvergenceError("Dirichlet plasma: no upper bracket", g(hi));
  }
  boost::uintmax_t iters = 200;
  auto root = boost::math::tools::toms748_solve(g, lo, hi,
                                                boost::math::tools::eps_tolerance<double>(50), iters);
  const double a = 0.5 * (root.first + root.second);

  std::vector<double> radii(output_cells + 1), values(output_cells + 1), derivs(output_cells + 1);
  namespace ode = boost::numeric::odeint;
  State y = series_start(a, gamma);
  radii[0] = 0.0;
  values[0] = a;
  derivs[0] = 0.0;
  auto stepper = ode::make_dense_output(tol, tol, ode::runge_kutta_dopri5<State>());
  double r = r_start;
  double mass_integral = 0.0;
  for (int k = 1; k <= output_cells; ++k) {
    double rk = double(k) / output_cells;
    ode::integrate_adaptive(stepper, LaneEmden{gamma}, y, r, rk, 1e-4);
    r = rk;
    radii[k] = rk;
    values[k] = y[0];
    derivs[k] = y[1];
    mass_integral = y[2];
  }
  if (std::abs(values.back()) > 1e-8)
    throw ConvergenceError("Dirichlet plasma: shooting residual too large", values.back());
  values.back() = 0.0;

  RadialProfile p(ProfileKind::dirichlet, 1.0, gamma, std::move(radii), std::move(values),
                  std::move(derivs));
  p.mass = 2.0 * std::numbers::pi * mass_integral;
  p.core_radius = 1.0;
  p.boundary_derivative = y[1];
  p.iterations = int(iters);
  p.last_change = std::abs(g(a));
  return p;
}

} // namespace karman
