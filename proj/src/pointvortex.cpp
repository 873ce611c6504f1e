#include "karman/pointvortex.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <boost/math/tools/roots.hpp>

namespace karman {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

// sum_k (y + kl e2)^perp / |y + kl e2|^{4-2s}; the k = 0 term dropped when skip0
LatticeSumN<2> perp_lattice_sum(Vec2 y, double l, double s, bool skip0,
                                const LatticeSumPolicy &policy) {
  const double e = s - 2.0; // |.|^{2s-4} = (|.|^2)^{s-2}
  auto f = [&](double h) {
    double a2 = y.x2 + h;
    double w = std::pow(y.x1 * y.x1 + a2 * a2, e);
    return std::array<double, 2>{a2 * w, -y.x1 * w};
  };
  auto term = [&](long k) {
    auto u = f(k * l), v = f(-k * l);
    return std::array<double, 2>{u[0] + v[0], u[1] + v[1]};
  };
  auto r = sum_series<2>(term, 4.0 - 2.0 * s,
                         policy_for_extent(policy, std::abs(y.x2) / l + std::abs(y.x1) / l));
  if (!skip0) {
    auto z = f(0.0);
    r.value[0] += z[0];
    r.value[1] += z[1];
  }
  return r;
}

} // namespace

bool is_staggered(double a, double l) { return std::abs(a - 0.25 * l) <= 1e-12 * l; }

void validate_geometry(const StreetGeometry &g) {
  if (!(g.d > 0.0))
    throw DomainError("street geometry: d must be > 0");
  if (!(g.l > 0.0))
    throw DomainError("street geometry: l must be > 0");
  if (!(g.a == 0.0 || is_staggered(g.a, g.l)))
    throw DomainError("street geometry: stagger a must be 0 or l/4 (got a=" + fmt(g.a) + ")");
  (void)coupling_constants(g.s);
}

LatticeSum street_speed(const StreetGeometry &geom, const LatticeSumPolicy &policy) {
  validate_geometry(geom);
  SQGParams prm = coupling_constants(geom.s);
  const double d = geom.d, l = geom.l, e = prm.s - 2.0;
  auto f = [&](double u) { return 2.0 * d * std::pow(4.0 * d * d + u * u, e); };
  LatticeSumPolicy pol = policy_for_extent(policy, d / l);
  pol.tolerance = policy.tolerance / prm.calC_s;
  LatticeSum r;
  if (geom.a == 0.0) {
    r = sum_series([&](long k) { return 2.0 * f(k * l); }, 4.0 - 2.0 * prm.s, pol);
    r.value += f(0.0);
  } else {
    r = sum_series([&](long k) { return 2.0 * f((k - 0.5) * l); }, 4.0 - 2.0 * prm.s, pol, -0.5);
  }
  r.value *= prm.calC_s;
  r.error *= prm.calC_s;
  return r;
}

namespace {

constexpr double kScanLo = 1e-4, kScanHi = 1e3;
constexpr int kScanPerDecade = 24;

std::vector<double> scan_grid(double l) {
  std::vector<double> d;
  int n = static_cast<int>(std::round(std::log10(kScanHi / kScanLo) * kScanPerDecade));
  for (int i = 0; i <= n; ++i)
    d.push_back(l * kScanLo * std::pow(10.0, double(i) / kScanPerDecade));
  return d;
}

double speed_at(double d, double l, double a, double s, const LatticeSumPolicy &policy) {
  return street_speed({d, l, a, s}, policy).value;
}

std::vector<double> scan_speeds(const std::vector<double> &grid, double l, double a, double s,
                                const LatticeSumPolicy &policy) {
  // sign detection only; brackets are refined at full tolerance
  LatticeSumPolicy coarse = policy;
  coarse.tolerance = std::max(policy.tolerance, 1e-9);
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    w[i] = speed_at(grid[i], l, a, s, coarse);
  return w;
}

SpeedRange speed_range_scanned(double l, double a, double s, const LatticeSumPolicy &policy,
                               const std::vector<double> &grid, const std::vector<double> &ws) {
  SQGParams prm = coupling_constants(s);
  SpeedRange r;
  bool stag = is_staggered(a, l);
  if (prm.log_kernel) {
    if (!stag) {
      r.lo = 1.0 / (2.0 * l);
      r.hi = INFINITY;
    } else {
      r.lo = 0.0;
      r.hi = 1.0 / (2.0 * l);
    }
    return r;
  }
  if (!stag) {
    r.lo = 0.0;
    r.hi = INFINITY;
    return r;
  }
  // W2 vanishes at both ends; locate the maximum
  std::size_t best = 0;
  double wbest = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double w = ws[i];
    if (w > wbest) {
      wbest = w;
      best = i;
    }
  }
  double lo = grid[best == 0 ? 0 : best - 1], hi = grid[std::min(best + 1, grid.size() - 1)];
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = speed_at(x1, l, a, s, policy), f2 = speed_at(x2, l, a, s, policy);
  for (int it = 0; it < 80 && hi - lo > 1e-13 * hi; ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = speed_at(x1, l, a, s, policy);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = speed_at(x2, l, a, s, policy);
    }
  }
  r.lo = 0.0;
  r.hi = std::max(f1, f2);
  r.hi_attained = true;
  return r;
}

} // namespace

SpeedRange street_speed_range(double l, double a, double s, const LatticeSumPolicy &policy) {
  validate_geometry({1.0, l, a, s});
  bool scan = !coupling_constants(s).log_kernel && is_staggered(a, l);
  auto grid = scan_grid(l);
  std::vector<double> ws;
  if (scan)
    ws = scan_speeds(grid, l, a, s, policy);
  return speed_range_scanned(l, a, s, policy, grid, ws);
}

std::vector<std::pair<double, double>> street_distance_brackets(double W, double l, double a,
                                                               double s,
                                                               const LatticeSumPolicy &policy) {
  if (!(W > 0.0))
    throw DomainError("target speed W must be > 0");
  validate_geometry({1.0, l, a, s});
  auto grid = scan_grid(l);
  auto ws = scan_speeds(grid, l, a, s, policy);
  SpeedRange range = speed_range_scanned(l, a, s, policy, grid, ws);
  bool inside = W > range.lo && (W < range.hi || (range.hi_attained && W <= range.hi));
  if (!inside) {
    std::ostringstream os;
    os << std::setprecision(12) << "infeasible target speed W=" << W << " for s=" << s
       << ", l=" << l << ", a=" << a << ": admissible range is (" << range.lo << ", "
       << range.hi << (range.hi_attained ? "]" : ")");
    throw FeasibilityError(os.str(), range.lo, range.hi);
  }
  std::vector<std::pair<double, double>> out;
  double prev = ws[0] - W;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    double cur = ws[i] - W;
    if (prev == 0.0)
      out.emplace_back(grid[i - 1], grid[i - 1]);
    else if ((prev < 0.0) != (cur < 0.0) && cur != 0.0)
      out.emplace_back(grid[i - 1], grid[i]);
    prev = cur;
  }
  if (prev == 0.0)
    out.emplace_back(grid.back(), grid.back());
  if (out.empty()) {
    std::ostringstream os;
    os << std::setprecision(12) << "no root of the speed condition for W=" << W
       << " within d in [" << grid.front() << ", " << grid.back() << "]";
    throw FeasibilityError(os.str(), ws.back(), ws.front());
  }
  return out;
}

std::vector<double> street_distance_roots(double W, double l, double a, double s,
                                          const LatticeSumPolicy &policy) {
  std::vector<double> roots;
  for (auto [lo, hi] : street_distance_brackets(W, l, a, s, policy)) {
    if (lo == hi) {
      roots.push_back(lo);
      continue;
    }
    auto g = [&](double d) { return speed_at(d, l, a, s, policy) - W; };
    boost::uintmax_t iters = 200;
    auto res = boost::math::tools::toms748_solve(
        g, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
    roots.push_back(0.5 * (res.first + res.second));
  }
  return roots;
}

double solve_street_distance(double W, double l, double a, double s,
                             const LatticeSumPolicy &policy, Branch branch) {
  auto br = street_distance_brackets(W, l, a, s, policy);
  if (br.size() > 1 && branch == Branch::unique) {
    std::ostringstream os;
    os << std::setprecision(10) << "speed condition W=" << W << " has " << br.size()
       << " roots; brackets:";
    for (auto [lo, hi] : br)
      os << " [" << lo << ", " << hi << "]";
    os << " (choose branch inner or outer)";
    throw AmbiguityError(os.str());
  }
  auto roots = street_distance_roots(W, l, a, s, policy);
  return branch == Branch::outer ? roots.back() : roots.front();
}

VortexConfiguration make_street(double d, double l, double a) {
  VortexConfiguration c;
  c.l = l;
  c.vortices = {{{-d, -a}, 1.0}, {{d, a}, -1.0}};
  return c;
}

double wrap_period(double x2, double l) { return x2 - l * std::floor((x2 + 0.5 * l) / l); }

void validate_configuration(const VortexConfiguration &config) {
  if (!(config.l > 0.0))
    throw DomainError("vortex configuration: period must be > 0");
  if (config.vortices.empty())
    throw DomainError("vortex configuration: at least one vortex required");
  for (const auto &v : config.vortices) {
    if (v.strength == 0.0)
      throw DomainError("vortex configuration: zero-strength vortex");
    if (!std::isfinite(v.position.x1) || !std::isfinite(v.position.x2))
      throw DomainError("vortex configuration: non-finite position");
  }
}

namespace {

double min_separation(const std::vector<Vortex> &vs, double l) {
  double m = INFINITY;
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = i + 1; j < vs.size(); ++j) {
      Vec2 y = vs[i].position - vs[j].position;
      y.x2 = wrap_period(y.x2, l);
      m = std::min(m, norm(y));
    }
  return m;
}

Vec2 velocity_on(std::size_t i, const std::vector<Vortex> &vs, double l, const SQGParams &prm,
                 const LatticeSumPolicy &policy) {
  Vec2 v{};
  for (std::size_t j = 0; j < vs.size(); ++j) {
    Vec2 y = vs[i].position - vs[j].position;
    y.x2 = wrap_period(y.x2, l);
    bool self = (i == j);
    if (!self && norm2(y) == 0.0)
      throw CollisionError("vortices coincide modulo the lattice", 0.0);
    auto r = perp_lattice_sum(y, l, prm.s, self, policy);
    v.x1 -= prm.calC_s * vs[j].strength * r.value[0];
    v.x2 -= prm.calC_s * vs[j].strength * r.value[1];
  }
  return v;
}

} // namespace

std::vector<Vec2> induced_velocities(const VortexConfiguration &config, double s,
                                     const LatticeSumPolicy &policy) {
  validate_configuration(config);
  SQGParams prm = coupling_constants(s);
  const auto &vs = config.vortices;
  std::vector<Vec2> out(vs.size());
  const long n = static_cast<long>(vs.size());
  bool failed = false;
  std::string msg;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = velocity_on(i, vs, config.l, prm, policy);
    } catch (const std::exception &e) {
#pragma omp critical
      {
        failed = true;
        msg = e.what();
      }
    }
  }
  if (failed)
    return induced_velocities_serial(config, s, policy); // rethrows in order
  return out;
}

std::vector<Vec2> induced_velocities_serial(const VortexConfiguration &config, double s,
                                            const LatticeSumPolicy &policy) {
  validate_configuration(config);
  SQGParams prm = coupling_constants(s);
  std::vector<Vec2> out(config.vortices.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = velocity_on(i, config.vortices, config.l, prm, policy);
  return out;
}

Trajectory evolve_point_vortices(const VortexConfiguration &config, double s, double dt,
                                 double T, const LatticeSumPolicy &policy,
                                 const EvolveOptions &options) {
  validate_configuration(config);
  if (!(dt > 0.0))
    throw DomainError("time step dt must be > 0");
  if (!(T >= dt * (1.0 - 1e-12)))
    throw DomainError("horizon T must be >= dt");
  if (options.stride < 1)
    throw DomainError("trajectory stride must be >= 1");
  const long nsteps = std::max(1L, std::lround(T / dt));
  const double h = T / nsteps;
  const double l = config.l;

  VortexConfiguration cur = config;
  for (auto &v : cur.vortices)
    v.position.x2 = wrap_period(v.position.x2, l);

  Trajectory traj;
  traj.l = l;
  traj.times.push_back(0.0);
  traj.frames.push_back(cur.vortices);

  auto shifted = [&](const std::vector<Vec2> &k, double c) {
    VortexConfiguration tmp = cur;
    for (std::size_t i = 0; i < k.size(); ++i)
      tmp.vortices[i].position += c * k[i];
    return tmp;
  };

  for (long n = 1; n <= nsteps; ++n) {
    double t = (n - 1) * h;
    double sep = min_separation(cur.vortices, l);
    if (sep < options.collision_floor)
      throw CollisionError("vortex collision at t=" + fmt(t) + " (separation " + fmt(sep) + ")",
                           t);
    auto k1 = induced_velocities(cur, s, policy);
    auto k2 = induced_velocities(shifted(k1, 0.5 * h), s, policy);
    auto k3 = induced_velocities(shifted(k2, 0.5 * h), s, policy);
    auto k4 = induced_velocities(shifted(k3, h), s, policy);
    for (std::size_t i = 0; i < cur.vortices.size(); ++i) {
      Vec2 inc = (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      auto &pos = cur.vortices[i].position;
      pos += inc;
      pos.x2 = wrap_period(pos.x2, l);
    }
    if (n % options.stride == 0 || n == nsteps) {
      traj.times.push_back(n * h);
      traj.frames.push_back(cur.vortices);
    }
  }
  return traj;
}

void write_trajectory_csv(const Trajectory &traj, std::ostream &out) {
  out << "t,vortex_index,x1,x2,strength\n";
  out << std::setprecision(17);
  for (std::size_t f = 0; f < traj.frames.size(); ++f)
    for (std::size_t i = 0; i < traj.frames[f].size(); ++i) {
      const auto &v = traj.frames[f][i];
      out << traj.times[f] << ',' << i << ',' << v.position.x1 << ',' << v.position.x2 << ','
          << v.strength << '\n';
    }
}

} // namespace karman
