#include "karman/plasma.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "karman/errors.hpp"
#include "karman/kernels.hpp"
#include "karman/parallel.hpp"

namespace karman {

namespace {

constexpr double pi = std::numbers::pi;

double f21_series(double a, double b, double c, double z) {
  double term = 1.0, total = 1.0;
  for (int n = 0; n < 4000; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z;
    total += term;
    if (std::abs(term) < 1e-17 * std::abs(total))
      break;
  }
  return total;
}

double agm(double a, double b) {
  for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
    double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return 0.5 * (a + b);
}

// c_s times the angular integral, evaluated through 2F1(1-s, 1/2; 1; m)
struct RingKernel {
  double s, cs, e, A, B;
  bool half;

  explicit RingKernel(double s_) : s(s_) {
    cs = coupling_constants(s).c_s;
    e = s - 0.5;
    half = std::abs(e) < 1e-8;
    if (!half) {
      A = std::tgamma(e) / (std::tgamma(s) * std::sqrt(pi));
      B = std::tgamma(-e) / (std::tgamma(1.0 - s) * std::sqrt(pi));
    }
  }

  // delta = rho - r, passed separately to keep it exact near the diagonal
  double operator()(double r, double rho, double delta) const {
    if (r == 0.0 || rho == 0.0)
      return 2.0 * pi * cs * std::pow(std::max(r, rho), 2.0 * s - 2.0);
    double sum = r + rho;
    double q = delta / sum;
    double z = q * q;
    double m = 1.0 - z;
    double F;
    if (half)
      F = 1.0 / agm(1.0, std::abs(q));
    else if (m < 0.5)
      F = f21_series(1.0 - s, 0.5, 1.0, m);
    else
      F = A * f21_series(1.0 - s, 0.5, 1.0 - e, z) +
          B * std::pow(std::abs(q), 2.0 * e) * f21_series(s, 0.5, 1.0 + e, z);
    return 2.0 * pi * cs * std::pow(sum, 2.0 * s - 2.0) * F;
  }

  // rho K; finite as rho -> 0 at r = 0
  double weighted(double r, double rho, double delta) const {
    if (r == 0.0)
      return 2.0 * pi * cs * std::pow(rho, 2.0 * s - 1.0);
    return rho * (*this)(r, rho, delta);
  }
};

struct Grid {
  int N;
  double h;
  std::vector<double> r; // core nodes 0..N then exterior
};

Grid make_grid(const FractionalGridSpec &g) {
  Grid out;
  out.N = g.core_nodes;
  out.h = 1.0 / g.core_nodes;
  for (int j = 0; j <= g.core_nodes; ++j)
    out.r.push_back(double(j) / g.core_nodes);
  double step = out.h;
  double x = 1.0;
  while (x < g.far_radius) {
    step = std::min(step * g.growth, g.max_log_step * x);
    x += step;
    out.r.push_back(x);
  }
  return out;
}

// W_ij = int phi_j(rho) rho K(r_i, rho) d rho over the hat at core node j
std::vector<double> weight_row(const RingKernel &K, const Grid &g, std::size_t i) {
  thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
  using gauss = boost::math::quadrature::gauss<double, 10>;
  const double r = g.r[i];
  const int N = g.N;
  const double h = g.h;
  std::vector<double> row(N, 0.0);
  for (int j = 0; j < N; ++j) {
    const double rj = g.r[j];
    double total = 0.0;
    for (int side = 0; side < 2; ++side) {
      if (j == 0 && side == 0)
        continue;
      const int ia = side == 0 ? j - 1 : j;
      const int ib = ia + 1;
      const double a = g.r[ia], b = g.r[ib];
      auto phi = [&](double rho) { return 1.0 - std::abs(rho - rj) / h; };
      bool near = std::abs(r - a) < 2.0 * h || std::abs(r - b) < 2.0 * h;
      if (!near) {
        total += gauss::integrate(
            [&](double rho) { return phi(rho) * K.weighted(r, rho, rho - r); }, a, b);
        continue;
      }
      const bool sing_a = std::size_t(ia) == i, sing_b = std::size_t(ib) == i;
      auto f = [&](double rho, double xc) {
        double delta = rho - r;
        if (sing_a && xc <= 0.0)
          delta = -xc;
        else if (sing_b && xc >= 0.0)
          delta = -xc;
        return phi(rho) * K.weighted(r, rho, delta);
      };
      total += ts.integrate(f, a, b, 1e-13);
    }
    row[j] = total;
  }
  return row;
}

} // namespace

double ring_kernel(double s, double r, double rho) {
  if (!(s > 0.0 && s < 1.0))
    throw DomainError("ring_kernel requires 0 < s < 1");
  if (r == rho && r != 0.0 && s <= 0.5)
    throw SingularityError("ring_kernel: diagonal is singular for s <= 1/2");
  return RingKernel(s)(r, rho, rho - r);
}

RadialProfile solve_plasma_fractional(double s, double gamma, const FractionalGridSpec &spec,
                                      double tolerance) {
  validate_fractional_gamma(s, gamma);
  if (spec.core_nodes < 8)
    throw DomainError("fractional plasma: core_nodes must be >= 8");
  if (!(spec.growth > 1.0) || !(spec.max_log_step > 0.0) || !(spec.far_radius > 2.0))
    throw DomainError("fractional plasma: invalid exterior grid");
  if (!(spec.threshold > 0.0) || !(spec.damping > 0.0 && spec.damping <= 1.0))
    throw DomainError("fractional plasma: invalid threshold or damping");

  const Grid g = make_grid(spec);
  const RingKernel K(s);
  const int N = g.N;
  const std::size_t rows = g.r.size();
  std::vector<std::vector<double>> W(rows);
  ExceptionTrap trap;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < rows; ++i)
    trap.run([&] { W[i] = weight_row(K, g, i); });
  trap.rethrow();

  const double t = spec.threshold;
  std::vector<double> v(N + 1), f(N), w(rows);
  for (int j = 0; j <= N; ++j)
    v[j] = t * (2.0 - g.r[j] * g.r[j]);

  auto apply = [&](const std::vector<double> &vv) {
    for (int j = 0; j < N; ++j)
      f[j] = std::pow(std::max(vv[j] - t, 0.0), gamma);
    for (std::size_t i = 0; i < rows; ++i) {
      double acc = 0.0;
      for (int j = 0; j < N; ++j)
        acc += W[i][j] * f[j];
      w[i] = acc;
    }
  };

  double change = 0.0;
  int it = 0;
  for (; it < spec.max_iterations; ++it) {
    apply(v);
    if (!(w[N] > 0.0))
      throw ConvergenceError("fractional plasma: iterate lost its core", w[N]);
    change = 0.0;
    for (int j = 0; j <= N; ++j) {
      double vn = t * w[j] / w[N];
      change = std::max(change, std::abs(vn - v[j]));
      v[j] = (1.0 - spec.damping) * v[j] + spec.damping * vn;
    }
    if (change < tolerance)
      break;
  }
  if (it == spec.max_iterations) {
    std::ostringstream os;
    os << "fractional plasma: no convergence after " << it << " iterations";
    throw ConvergenceError(os.str(), change);
  }
  apply(v);

  const double kappa = t / w[N];
  const double R = std::pow(kappa * std::pow(t, gamma - 1.0), 1.0 / (2.0 * s));
  double moment = f[0] * g.h * g.h / 6.0;
  for (int j = 1; j < N; ++j)
    moment += f[j] * g.r[j] * g.h;
  const double mass = R * R * std::pow(t, -gamma) * 2.0 * pi * moment;

  std::vector<double> radii(rows), values(rows), derivs(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    radii[i] = g.r[i] * R;
    values[i] = w[i] / w[N];
  }
  // five-point derivatives; even reflection at the origin
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> nodes, vals;
    for (int k = -2; k <= 2; ++k) {
      long idx = long(i) + k;
      if (idx >= long(rows))
        idx = long(i) - 2 - (idx - long(rows) + 1);
      if (idx < 0) {
        nodes.push_back(-radii[-idx]);
        vals.push_back(values[-idx]);
      } else {
        nodes.push_back(radii[idx]);
        vals.push_back(values[idx]);
      }
    }
    auto c = derivative_weights(radii[i], nodes);
    double d = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
      d += c[k] * vals[k];
    derivs[i] = i == 0 ? 0.0 : d;
  }

  RadialProfile p(ProfileKind::fractional, s, gamma, std::move(radii), std::move(values),
                  std::move(derivs));
  p.mass = mass;
  p.core_radius = R;
  p.attach_far_field(coupling_constants(s).c_s * mass, 32.0 * R);
  p.iterations = it + 1;
  p.last_change = change;
  return p;
}

} // namespace karman
