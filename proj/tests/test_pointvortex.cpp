#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "karman/errors.hpp"
#include "karman/pointvortex.hpp"

using namespace karman;
using std::numbers::pi;

namespace {
double coth(double x) { return 1.0 / std::tanh(x); }
} // namespace

TEST_CASE("s=1 street speeds against coth/tanh") {
  LatticeSumPolicy pol;
  for (double l : {0.5, 1.0, 3.0})
    for (double d : {0.05, 0.3, 1.0, 2.5}) {
      double w1 = street_speed({d, l, 0.0, 1.0}, pol).value;
      double w2 = street_speed({d, l, l / 4, 1.0}, pol).value;
      CHECK(std::abs(w1 - coth(2 * pi * d / l) / (2 * l)) < 1e-10);
      CHECK(std::abs(w2 - std::tanh(2 * pi * d / l) / (2 * l)) < 1e-10);
    }
}

TEST_CASE("street speed homogeneity") {
  LatticeSumPolicy pol;
  for (double s : {0.3, 0.5, 0.75, 1.0})
    for (double a : {0.0, 0.25}) {
      double w = street_speed({0.4, 1.0, a, s}, pol).value;
      double w2 = street_speed({0.8, 2.0, 2 * a, s}, pol).value;
      CHECK(w2 == doctest::Approx(std::pow(2.0, 2 * s - 3) * w).epsilon(1e-10));
      CHECK(w > 0.0);
    }
}

TEST_CASE("solve street distance") {
  LatticeSumPolicy pol;
  double d = solve_street_distance(1.0, 1.0, 0.0, 1.0, pol);
  CHECK(d == doctest::Approx(std::atanh(0.5) / (2 * pi)).epsilon(1e-10));
  CHECK_THROWS_AS(solve_street_distance(0.5, 1.0, 0.0, 1.0, pol), FeasibilityError);
  CHECK_THROWS_AS(solve_street_distance(0.3, 1.0, 0.0, 1.0, pol), FeasibilityError);
  CHECK_THROWS_AS(solve_street_distance(0.5, 1.0, 0.25, 1.0, pol), FeasibilityError);
  try {
    solve_street_distance(0.2, 2.0, 0.0, 1.0, pol);
    FAIL("expected FeasibilityError");
  } catch (const FeasibilityError &e) {
    CHECK(e.lower() == doctest::Approx(0.25));
  }
  for (double s : {0.5, 0.75}) {
    for (double W : {0.05, 0.3, 2.0}) {
      double dd = solve_street_distance(W, 1.0, 0.0, s, pol);
      CHECK(std::abs(street_speed({dd, 1.0, 0.0, s}, pol).value - W) < 1e-8);
    }
  }
}

TEST_CASE("staggered s<1 branch structure") {
  LatticeSumPolicy pol;
  auto range = street_speed_range(1.0, 0.25, 0.75, pol);
  CHECK(range.hi_attained);
  double W = 0.5 * range.hi;
  auto roots = street_distance_roots(W, 1.0, 0.25, 0.75, pol);
  REQUIRE(roots.size() == 2);
  CHECK_THROWS_AS(solve_street_distance(W, 1.0, 0.25, 0.75, pol), AmbiguityError);
  double din = solve_street_distance(W, 1.0, 0.25, 0.75, pol, Branch::inner);
  double dout = solve_street_distance(W, 1.0, 0.25, 0.75, pol, Branch::outer);
  CHECK(din < dout);
  CHECK(std::abs(street_speed({din, 1.0, 0.25, 0.75}, pol).value - W) < 1e-8);
  CHECK(std::abs(street_speed({dout, 1.0, 0.25, 0.75}, pol).value - W) < 1e-8);
  CHECK_THROWS_AS(solve_street_distance(1.01 * range.hi, 1.0, 0.25, 0.75, pol), FeasibilityError);
}

TEST_CASE("induced velocities") {
  LatticeSumPolicy pol;
  for (double s : {0.5, 0.75, 1.0})
    for (double a : {0.0, 0.25}) {
      auto cfg = make_street(0.3, 1.0, a);
      auto v = induced_velocities(cfg, s, pol);
      double W = street_speed({0.3, 1.0, a, s}, pol).value;
      for (auto &u : v) {
        CHECK(std::abs(u.x1) < 1e-10);
        CHECK(std::abs(u.x2 - W) < 1e-10);
      }
      auto vs = induced_velocities_serial(cfg, s, pol);
      for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(v[i].x1 == vs[i].x1);
        CHECK(v[i].x2 == vs[i].x2);
      }
      for (auto &vx : cfg.vortices)
        vx.strength = -vx.strength;
      auto vn = induced_velocities(cfg, s, pol);
      for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(vn[i].x1 == doctest::Approx(-v[i].x1));
        CHECK(vn[i].x2 == doctest::Approx(-v[i].x2));
      }
    }
  VortexConfiguration single{{{{0.2, 0.1}, 1.0}}, 1.0};
  auto v = induced_velocities(single, 0.6, pol);
  CHECK(std::abs(v[0].x1) < 1e-14);
  CHECK(std::abs(v[0].x2) < 1e-14);

  VortexConfiguration clash{{{{0.2, 0.1}, 1.0}, {{0.2, 1.1}, -1.0}}, 1.0};
  CHECK_THROWS_AS(induced_velocities(clash, 0.6, pol), CollisionError);
}

TEST_CASE("translation equivariance of velocities") {
  LatticeSumPolicy pol;
  VortexConfiguration c{{{{-0.3, 0.1}, 1.0}, {{0.25, -0.2}, -0.7}, {{0.1, 0.3}, 0.4}}, 1.0};
  auto v = induced_velocities(c, 0.7, pol);
  auto shifted = c;
  for (auto &x : shifted.vortices)
    x.position = x.position + Vec2{0.4, 0.05};
  auto w = induced_velocities(shifted, 0.7, pol);
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(std::abs(v[i].x1 - w[i].x1) < 1e-11);
    CHECK(std::abs(v[i].x2 - w[i].x2) < 1e-11);
  }
}

TEST_CASE("point vortex street translates rigidly") {
  LatticeSumPolicy pol;
  for (double a : {0.0, 0.25}) {
    auto cfg = make_street(0.3, 1.0, a);
    double W = street_speed({0.3, 1.0, a, 1.0}, pol).value;
    auto tr = evolve_point_vortices(cfg, 1.0, 1e-3, 0.2, pol, {50, 1e-8});
    const auto &last = tr.frames.back();
    for (std::size_t i = 0; i < last.size(); ++i) {
      CHECK(std::abs(last[i].position.x1 - cfg.vortices[i].position.x1) < 1e-9);
      double dx2 = wrap_period(last[i].position.x2 - cfg.vortices[i].position.x2 - 0.2 * W, 1.0);
      CHECK(std::abs(dx2) < 1e-9);
    }
  }
}

TEST_CASE("time reversal") {
  LatticeSumPolicy pol;
  VortexConfiguration c{{{{-0.3, 0.1}, 1.0}, {{0.25, -0.2}, -0.7}, {{0.1, 0.3}, 0.4}}, 1.0};
  auto fwd = evolve_point_vortices(c, 0.8, 1e-3, 0.1, pol, {100, 1e-8});
  VortexConfiguration mid{fwd.frames.back(), 1.0};
  for (auto &v : mid.vortices)
    v.strength = -v.strength;
  auto back = evolve_point_vortices(mid, 0.8, 1e-3, 0.1, pol, {100, 1e-8});
  for (std::size_t i = 0; i < c.vortices.size(); ++i) {
    CHECK(std::abs(back.frames.back()[i].position.x1 - c.vortices[i].position.x1) < 1e-9);
    CHECK(std::abs(wrap_period(back.frames.back()[i].position.x2 - c.vortices[i].position.x2,
                               1.0)) < 1e-9);
  }
}

TEST_CASE("trajectory csv") {
  LatticeSumPolicy pol;
  auto tr = evolve_point_vortices(make_street(0.3, 1.0, 0.0), 1.0, 0.01, 0.02, pol, {1, 1e-8});
  std::ostringstream os;
  write_trajectory_csv(tr, os);
  auto s = os.str();
  CHECK(s.rfind("t,vortex_index,x1,x2,strength\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 3 * 2);
}
