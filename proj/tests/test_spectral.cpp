#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "karman/errors.hpp"
#include "karman/pointvortex.hpp"
#include "karman/spectral.hpp"
#include "karman/street.hpp"
#include "oracles.hpp"

using namespace karman;
using std::numbers::pi;

namespace {

// smooth zero-mean field from a few random modes
BoxField random_field(int nx, int ny, double Lx, double Ly, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  BoxField f(nx, ny, Lx, Ly);
  for (int m = 0; m < 6; ++m) {
    int p = 1 + static_cast<int>(rng() % 5), q = static_cast<int>(rng() % 5);
    double amp = u(rng), ph = pi * u(rng);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        Vec2 x = f.point(i, j);
        f.at(i, j) += amp * std::cos(2 * pi * p * x.x1 / Lx + 2 * pi * q * x.x2 / Ly + ph);
      }
  }
  return f;
}

double max_diff(const BoxField &a, const BoxField &b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

StreetConfig evolve_config(double a = 0.0) {
  StreetConfig c;
  c.s = 1.0;
  c.l = 1.6;
  c.d = 0.8;
  c.a = a * c.l;
  c.r_cut = a > 0.0 ? 0.38 : 0.45;
  c.eps = c.sigma = 0.05;
  c.gamma1 = c.gamma2 = 2.0;
  return c;
}

BoxField street_box(const StreetProfiles &st, int n) {
  const double l = st.config.l;
  BoxField f(n, n, 8.0 * l, l);
  f.values = sample_vorticity(st, n, n, 8.0 * l);
  return f;
}

const StreetProfiles &unstaggered() {
  static StreetProfiles st = make_street_profiles(evolve_config());
  return st;
}

double stable_dt(const BoxField &f, double s, double frac = 0.4) {
  GsqgSolver probe(f, s);
  return frac * std::min(f.hx(), f.hy()) / probe.max_speed();
}

BoxField flip_x2(const BoxField &f) {
  BoxField g(f.nx, f.ny, f.Lx, f.Ly);
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i)
      g.at(i, j) = f.at(i, (f.ny - j) % f.ny);
  return g;
}

} // namespace

TEST_CASE("single Fourier mode is an eigenfunction") {
  const double Lx = 4.0, Ly = 1.0;
  BoxField f(64, 32, Lx, Ly);
  const double k1 = 2 * pi * 3 / Lx, k2 = 2 * pi * 2 / Ly;
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i) {
      Vec2 x = f.point(i, j);
      f.at(i, j) = std::cos(k1 * x.x1 + k2 * x.x2);
    }
  for (double s : {0.3, 0.5, 1.0})
    for (int sign : {1, -1}) {
      BoxField g = frac_laplacian_apply(f, s, sign);
      double lam = std::pow(k1 * k1 + k2 * k2, sign * s);
      double err = 0.0;
      for (std::size_t k = 0; k < f.values.size(); ++k)
        err = std::max(err, std::abs(g.values[k] - lam * f.values[k]));
      CHECK(err <= 1e-12 * lam);
    }
}

TEST_CASE("(-Delta)^{-s} inverts (-Delta)^s on zero-mean fields") {
  BoxField f = random_field(64, 64, 3.0, 1.0, 7);
  for (double s : {0.25, 0.5, 0.75, 1.0}) {
    BoxField g = frac_laplacian_apply(frac_laplacian_apply(f, s, 1), s, -1);
    CHECK(max_diff(f, g) <= 1e-12 * f.max_abs());
  }
}

TEST_CASE("spectral operator matches the strip hypersingular quadrature on a bump") {
  const double l = 1.0, Lx = 8.0, R = 0.3;
  auto bump = [R](double r) { return r < R ? std::pow(1.0 - r * r / (R * R), 4) : 0.0; };
  BoxField f(1024, 128, Lx, l);
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i) {
      Vec2 x = f.point(i, j);
      f.at(i, j) = bump(std::hypot(x.x1, x.x2));
    }
  const int i0 = f.nx / 2, j0 = f.ny / 2;
  for (double s : {0.3, 0.5, 0.7}) {
    BoxField g = frac_laplacian_apply(f, s, 1);
    std::vector<double> got, want;
    for (int m : {0, 13, 26, 38, 58}) {
      double r = m * f.hx();
      got.push_back(g.at(i0 + m, j0));
      want.push_back(oracles::strip_frac_laplacian(bump, s, R, l, r));
    }
    double scale = 0.0, err = 0.0;
    for (std::size_t k = 0; k < got.size(); ++k) {
      scale = std::max(scale, std::abs(want[k]));
      err = std::max(err, std::abs(got[k] - want[k]));
    }
    MESSAGE("s=" << s << " relative error " << err / scale);
    CHECK(err <= 1e-3 * scale);
  }
}

TEST_CASE("quadrature oracle reproduces the closed form at the bump center") {
  // (-Delta)^s (1-|x|^2)_+^4 at 0 equals 4^s Gamma(1+s) Gamma(5) / Gamma(5-s)
  for (double s : {0.3, 0.5, 0.7}) {
    auto f = [](double r) { return r < 1.0 ? std::pow(1.0 - r * r, 4) : 0.0; };
    double want = std::pow(4.0, s) * std::tgamma(1 + s) * 24.0 / std::tgamma(5 - s);
    CHECK(oracles::frac_laplacian_radial(f, s, 1.0, 0.0) == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("velocity is divergence free") {
  BoxField f = random_field(64, 32, 4.0, 1.0, 11);
  for (double s : {0.3, 0.75, 1.0}) {
    auto v = velocity_from_theta(f, s);
    CHECK(spectral_divergence(v) <= 1e-12);
  }
}

TEST_CASE("narrow Gaussian pair reproduces the point-vortex velocities") {
  const double l = 1.0, Lx = 32.0, d = 0.5, sig = 0.04;
  for (double a : {0.0, 0.25}) {
    BoxField f(2048, 64, Lx, l);
    auto gauss = [&](Vec2 x, Vec2 c) {
      double dx = x.x1 - c.x1, dy = x.x2 - c.x2;
      dy -= l * std::round(dy / l);
      return std::exp(-(dx * dx + dy * dy) / (2 * sig * sig)) / (2 * pi * sig * sig);
    };
    for (int j = 0; j < f.ny; ++j)
      for (int i = 0; i < f.nx; ++i) {
        Vec2 x = f.point(i, j);
        f.at(i, j) = gauss(x, {-d, -a}) - gauss(x, {d, a});
      }
    auto cfg = make_street(d, l, a);
    auto at = [&](const VelocityField &v, Vec2 c) {
      int i = static_cast<int>(std::lround((c.x1 + Lx / 2) / f.hx()));
      int j = static_cast<int>(std::lround((c.x2 + l / 2) / f.hy()));
      return Vec2{v.v1.at(i, j), v.v2.at(i, j)};
    };
    for (double s : {0.5, 0.75, 1.0}) {
      auto pv = induced_velocities(cfg, s, {});
      // at s = 1 the pure box carries a uniform back-flow; use the strip frame
      VelocityField v = s < 1.0 ? velocity_from_theta(f, s) : GsqgSolver(f, s).velocity();
      for (int k = 0; k < 2; ++k) {
        Vec2 got = at(v, cfg.vortices[k].position), want = pv[k];
        double err = std::hypot(got.x1 - want.x1, got.x2 - want.x2) / std::hypot(want.x1, want.x2);
        MESSAGE("s=" << s << " a=" << a << " vortex " << k << " rel " << err);
        CHECK(err <= 0.03);
      }
    }
  }
}

TEST_CASE("translating theta by half the period translates v") {
  BoxField f = random_field(32, 32, 2.0, 1.0, 3);
  BoxField g(f.nx, f.ny, f.Lx, f.Ly);
  const int half = f.ny / 2;
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i)
      g.at(i, j) = f.at(i, (j + half) % f.ny);
  auto vf = velocity_from_theta(f, 0.5), vg = velocity_from_theta(g, 0.5);
  double err = 0.0;
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i) {
      err = std::max(err, std::abs(vg.v1.at(i, j) - vf.v1.at(i, (j + half) % f.ny)));
      err = std::max(err, std::abs(vg.v2.at(i, j) - vf.v2.at(i, (j + half) % f.ny)));
    }
  CHECK(err <= 1e-12);
  BoxField h = shift_x2(f, 0.5 * f.Ly);
  CHECK(max_diff(h, g) <= 1e-12);
}

TEST_CASE("mean and CFL errors") {
  BoxField f = random_field(32, 32, 2.0, 1.0, 5);
  for (double &v : f.values)
    v += 0.1;
  CHECK_THROWS_AS(frac_laplacian_apply(f, 0.5, -1), MeanError);
  CHECK_THROWS_AS(velocity_from_theta(f, 0.5), MeanError);
  CHECK_NOTHROW(frac_laplacian_apply(f, 0.5, 1));
  CHECK_THROWS_AS(frac_laplacian_apply(f, 0.5, 2), DomainError);

  GsqgSolver solver(f, 0.5);
  double big = 10.0 * f.hx() / solver.max_speed();
  double suggested = 0.0;
  try {
    solver.step(big);
  } catch (const CflError &e) {
    suggested = e.suggested_dt();
  }
  REQUIRE(suggested > 0.0);
  CHECK(suggested < big);
  CHECK_NOTHROW(solver.step(suggested));
  CHECK_THROWS_AS(validate_box(48, 32, 1.0, 1.0), DomainError);
}

TEST_CASE("integral of theta per step and Casimir drift over 100 steps") {
  BoxField f = street_box(unstaggered(), 256);
  const double dt = stable_dt(f, 1.0);
  GsqgSolver solver(f, 1.0);
  const double c1 = solver.casimir1(), c2 = solver.casimir2(), H = solver.hamiltonian();
  double worst = 0.0, prev = c1;
  for (int k = 0; k < 100; ++k) {
    solver.step(dt);
    worst = std::max(worst, std::abs(solver.casimir1() - prev));
    prev = solver.casimir1();
  }
  MESSAGE("C1 step change " << worst << ", C2 drift " << std::abs(solver.casimir2() / c2 - 1)
                            << ", H drift " << std::abs(solver.hamiltonian() / H - 1));
  CHECK(worst <= 1e-12);
  CHECK(std::abs(solver.casimir2() / c2 - 1) <= 1e-6);
  CHECK(std::abs(solver.hamiltonian() / H - 1) <= 1e-4);
}

TEST_CASE("a radial vortex does not move") {
  BoxField f(128, 128, 2.0, 2.0);
  const Vec2 c = f.point(32, 80);
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i) {
      Vec2 x = f.point(i, j);
      f.at(i, j) = std::exp(-(std::pow(x.x1 - c.x1, 2) + std::pow(x.x2 - c.x2, 2)) / 0.005);
    }
  for (double s : {0.5, 1.0}) {
    SolverOptions o;
    o.strip_frame = false; // a lone vortex in the box has no street back-flow
    GsqgSolver solver(f, s, o);
    const double dt = 0.4 * f.hx() / solver.max_speed();
    for (int k = 0; k < 40; ++k)
      solver.step(dt);
    Vec2 m = positive_centroid(solver.theta());
    CHECK(std::abs(m.x1 - c.x1) <= 1e-8);
    CHECK(std::abs(m.x2 - c.x2) <= 1e-8);
  }
}

TEST_CASE("serial and parallel transforms agree") {
  BoxField f = random_field(64, 32, 4.0, 1.0, 13);
  SpectralGrid g(64, 32, 4.0, 1.0);
  Spectrum a, b;
  g.forward(f.values, a);
  g.forward_serial(f.values, b);
  double err = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    err = std::max(err, std::abs(a[k] - b[k]));
  CHECK(err <= 1e-13 * f.values.size());
  CHECK(max_diff(frac_laplacian_apply(f, 0.6, 1), frac_laplacian_apply_serial(f, 0.6, 1)) <=
        1e-12);

  SolverOptions par, ser;
  ser.parallel = false;
  GsqgSolver p(f, 0.5, par), s(f, 0.5, ser);
  const double dt = 0.3 * f.hy() / p.max_speed();
  for (int k = 0; k < 5; ++k) {
    p.step(dt);
    s.step(dt);
  }
  CHECK(max_diff(p.theta(), s.theta()) <= 1e-13 * f.max_abs());
}

TEST_CASE("time reversal by the x2 reflection") {
  BoxField f = street_box(unstaggered(), 128);
  const double dt = stable_dt(f, 1.0);
  const int n = 20;
  GsqgSolver fwd(f, 1.0);
  for (int k = 0; k < n; ++k)
    fwd.step(dt);
  GsqgSolver back(flip_x2(fwd.theta()), 1.0);
  for (int k = 0; k < n; ++k)
    back.step(dt);
  BoxField g = flip_x2(back.theta());
  BoxField f0 = GsqgSolver(f, 1.0).theta(); // dealiased initial field
  Vec2 a = positive_centroid(f0), b = positive_centroid(g);
  Vec2 moved = positive_centroid(fwd.theta());
  MESSAGE("centroid moved " << moved.x2 - a.x2 << ", returned to within "
                            << std::hypot(a.x1 - b.x1, a.x2 - b.x2));
  CHECK(moved.x2 - a.x2 > 0.01);
  CHECK(std::hypot(a.x1 - b.x1, a.x2 - b.x2) <= 1e-8);
  CHECK(max_diff(f0, g) <= 1e-6 * f0.max_abs());
}

TEST_CASE("staggered street drifts along +e2 only") {
  StreetProfiles st = make_street_profiles(evolve_config(0.25));
  BoxField f = street_box(st, 512);
  TravellingOptions o;
  o.T = 0.2;
  o.dt = stable_dt(f, 1.0);
  o.sample_every = 20;
  auto rep = run_travelling_test(f, 1.0, st.geom.W, o);
  MESSAGE("W " << rep.W_measured << " vs " << rep.W_expected << ", x1 drift " << rep.x1_drift);
  CHECK_FALSE(rep.unstable);
  for (std::size_t k = 1; k < rep.samples.size(); ++k)
    CHECK(rep.samples[k].centroid_x2 > rep.samples[k - 1].centroid_x2);
  CHECK(rep.x1_drift <= 1e-3 * st.config.l);
}

TEST_CASE("travelling report CSV and option validation") {
  BoxField f = street_box(unstaggered(), 64);
  TravellingOptions o;
  o.T = 0.01;
  o.dt = 0.005;
  o.sample_every = 1;
  auto rep = run_travelling_test(f, 1.0, unstaggered().geom.W, o);
  std::ostringstream os;
  write_travelling_csv(rep, os);
  CHECK(os.str().rfind("t,centroid_x1,centroid_x2,W_inst,l2_shape_err,casimir1,casimir2,hamiltonian\n", 0) == 0);
  CHECK(rep.samples.size() == 3);
  CHECK(rep.samples.front().shape_error <= 1e-12);
  o.T = 0.0;
  CHECK_THROWS_AS(run_travelling_test(f, 1.0, 1.0, o), DomainError);
}
