#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "json.hpp"
#include "karman/errors.hpp"
#include "karman/parallel.hpp"
#include "karman/street.hpp"

namespace karman {

double rho_weight(const StreetProfiles &st, Vec2 x) {
  const double l = st.config.l, s = st.params.s;
  x = {x.x1, wrap_period(x.x2, l)};
  const double ry = norm(x - st.geom.p), rz = norm(x - st.geom.q);
  double local;
  if (st.params.log_kernel) {
    const double r = st.geom.r_cut;
    local = std::abs(std::log(2.0 * r / (r + ry)) - std::log(2.0 * r / (r + rz)));
  } else {
    const double e = 2.0 - 2.0 * s;
    local = std::abs(1.0 / (std::pow(st.config.eps, e) + std::pow(ry, e)) -
                     1.0 / (std::pow(st.config.sigma, e) + std::pow(rz, e)));
  }
  const double p = 4.0 - 2.0 * s;
  auto term = [&](long k) {
    double a = x.x2 + k * l, b = x.x2 - k * l;
    return std::pow(x.x1 * x.x1 + a * a, -0.5 * p) + std::pow(x.x1 * x.x1 + b * b, -0.5 * p);
  };
  LatticeSumPolicy pol = st.config.trunc;
  pol.tolerance = std::max(pol.tolerance, 1e-10 * std::pow(l, -p));
  return local + sum_series(term, p, policy_for_extent(pol, norm(x) / l)).value;
}

WeightedNorms weighted_norms(const FieldSamples &f, const StreetProfiles &st) {
  const std::size_t n = f.points.size();
  std::vector<double> rho(n);
  ExceptionTrap trap;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < n; ++i)
    trap.run([&] { rho[i] = rho_weight(st, f.points[i]); });
  trap.rethrow();
  WeightedNorms w;
  w.rho_floor = n ? INFINITY : 0.0;
  double left = 0.0, right = 0.0;
  const double e2 = st.config.eps * st.config.eps, s2 = st.config.sigma * st.config.sigma;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::abs(f.values[i]);
    w.rho_floor = std::min(w.rho_floor, rho[i]);
    w.star = std::max(w.star, v / rho[i]);
    if (f.points[i].x1 < 0.0)
      left = std::max(left, e2 * v);
    else
      right = std::max(right, s2 * v);
  }
  w.starstar = left + right;
  return w;
}

FieldSamples patch_grid(const StreetProfiles &st, const PatchGridSpec &spec) {
  if (spec.cells < 16) {
    std::ostringstream os;
    os << "patch grid has " << spec.cells << " cells across the core; at least 16 required";
    throw ResolutionError(os.str());
  }
  if (!(spec.extent > 0.0))
    throw DomainError("patch grid extent must be > 0");
  FieldSamples g;
  const double r = st.geom.r_cut;
  for (const Patch *P : {&st.plus, &st.minus}) {
    const double h = 2.0 * P->core_radius / spec.cells;
    const double w = std::min(spec.extent * P->core_radius, r);
    const long half = static_cast<long>(std::ceil(w / h));
    for (long j = -half; j < half; ++j)
      for (long i = -half; i < half; ++i) {
        Vec2 off{(i + 0.5) * h, (j + 0.5) * h};
        if (norm(off) >= r || std::abs(off.x1) > w || std::abs(off.x2) > w)
          continue;
        g.points.push_back(P->center + off);
        g.weights.push_back(h * h);
      }
  }
  g.values.assign(g.points.size(), 0.0);
  return g;
}

namespace {

template <class F> void fill_values(FieldSamples &g, F &&f) {
  const std::size_t n = g.points.size();
  ExceptionTrap trap;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < n; ++i)
    trap.run([&] { g.values[i] = f(g.points[i]); });
  trap.rethrow();
}

} // namespace

std::pair<double, double> support_radii(const StreetProfiles &st, const PatchGridSpec &spec) {
  FieldSamples g = patch_grid(st, spec);
  fill_values(g, [&](Vec2 x) { return assemble_vorticity(st, x); });
  double Lp = 0.0, Lm = 0.0;
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    if (g.values[i] > 0.0)
      Lp = std::max(Lp, norm(g.points[i] - st.geom.p));
    else if (g.values[i] < 0.0)
      Lm = std::max(Lm, norm(g.points[i] - st.geom.q));
  }
  return {Lp / st.config.eps, Lm / st.config.sigma};
}

ResidualReport residual_field(const StreetProfiles &st, const PatchGridSpec &spec) {
  ResidualReport rep;
  rep.field = patch_grid(st, spec);
  fill_values(rep.field, [&](Vec2 x) { return residual_at(st, x); });
  rep.norms = weighted_norms(rep.field, st);
  auto L = support_radii(st, spec);
  rep.L_plus = L.first;
  rep.L_minus = L.second;
  return rep;
}

namespace {

double ez_integral(const StreetProfiles &st, const PatchGridSpec &spec) {
  FieldSamples g = patch_grid(st, spec);
  fill_values(g, [&](Vec2 x) {
    double e = residual_at(st, x);
    return e == 0.0 ? 0.0 : e * kernel_mode_Z(st, x);
  });
  double sum = 0.0;
  for (std::size_t i = 0; i < g.values.size(); ++i)
    sum += g.values[i] * g.weights[i];
  return sum;
}

} // namespace

ReductionValue reduction_functional(const StreetProfiles &st, const PatchGridSpec &spec) {
  ReductionValue r;
  r.value = ez_integral(st, spec);
  PatchGridSpec half = spec;
  half.cells = std::max(16, spec.cells / 2);
  r.coarse = half.cells == spec.cells ? r.value : ez_integral(st, half);
  r.richardson = r.value + (r.value - r.coarse) / 3.0;
  return r;
}

ReductionRoot reduction_root(const StreetConfig &config, const RadialPair &radials, double d_lo,
                             double d_hi, int scan_points, const PatchGridSpec &spec) {
  if (!config.W)
    throw DomainError("reduction_root needs a target speed W");
  if (!(d_lo > 0.0 && d_hi > d_lo) || scan_points < 2)
    throw DomainError("reduction_root needs 0 < d_lo < d_hi and at least 2 scan points");
  ReductionRoot out;
  out.d_speed = solve_street_distance(*config.W / street_circulation(config, radials), config.l,
                                      config.a, config.s, config.trunc, config.branch);
  auto F = [&](double d) {
    StreetConfig c = config;
    c.d = d;
    return ez_integral(build_street(c, radials), spec);
  };
  const double ratio = std::pow(d_hi / d_lo, 1.0 / (scan_points - 1));
  double d = d_lo;
  for (int i = 0; i < scan_points; ++i, d *= ratio)
    out.scan.emplace_back(d, F(d));
  int best = -1;
  double best_dist = INFINITY;
  for (int i = 0; i + 1 < scan_points; ++i) {
    double f0 = out.scan[i].second, f1 = out.scan[i + 1].second;
    if ((f0 < 0.0) == (f1 < 0.0))
      continue;
    double mid = std::sqrt(out.scan[i].first * out.scan[i + 1].first);
    double dist = std::abs(std::log(mid / out.d_speed));
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  if (best < 0)
    throw ConvergenceError("reduction functional has no sign change on the scanned d range");
  boost::uintmax_t iters = 60;
  auto res = boost::math::tools::toms748_solve(
      F, out.scan[best].first, out.scan[best + 1].first, out.scan[best].second,
      out.scan[best + 1].second, boost::math::tools::eps_tolerance<double>(30), iters);
  out.d = 0.5 * (res.first + res.second);
  return out;
}

namespace {

template <bool Parallel, class F>
std::vector<double> sample_box(const StreetProfiles &st, int nx, int ny, double Lx, F &&f) {
  if (nx < 1 || ny < 1 || !(Lx > 0.0))
    throw DomainError("sampling box needs nx, ny >= 1 and Lx > 0");
  const double l = st.config.l, hx = Lx / nx, hy = l / ny;
  std::vector<double> v(static_cast<std::size_t>(nx) * ny);
  ExceptionTrap trap;
#pragma omp parallel for schedule(dynamic, 1) if (Parallel)
  for (int j = 0; j < ny; ++j)
    trap.run([&] {
      for (int i = 0; i < nx; ++i)
        v[static_cast<std::size_t>(j) * nx + i] = f(Vec2{-Lx / 2 + i * hx, -l / 2 + j * hy});
    });
  trap.rethrow();
  return v;
}

} // namespace

std::vector<double> sample_vorticity(const StreetProfiles &st, int nx, int ny, double Lx) {
  return sample_box<true>(st, nx, ny, Lx, [&](Vec2 x) { return assemble_vorticity(st, x); });
}
std::vector<double> sample_vorticity_serial(const StreetProfiles &st, int nx, int ny, double Lx) {
  return sample_box<false>(st, nx, ny, Lx, [&](Vec2 x) { return assemble_vorticity(st, x); });
}
std::vector<double> sample_stream(const StreetProfiles &st, int nx, int ny, double Lx) {
  return sample_box<true>(st, nx, ny, Lx, [&](Vec2 x) { return assemble_stream(st, x); });
}
std::vector<double> sample_stream_serial(const StreetProfiles &st, int nx, int ny, double Lx) {
  return sample_box<false>(st, nx, ny, Lx, [&](Vec2 x) { return assemble_stream(st, x); });
}

void write_snapshot_csv(const StreetProfiles &st, int nx, int ny, double Lx, std::ostream &out) {
  auto th = sample_vorticity(st, nx, ny, Lx);
  auto ps = sample_stream(st, nx, ny, Lx);
  const double l = st.config.l, hx = Lx / nx, hy = l / ny;
  out << "x1,x2,theta,psi\n" << std::setprecision(17);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      std::size_t k = static_cast<std::size_t>(j) * nx + i;
      out << -Lx / 2 + i * hx << ',' << -l / 2 + j * hy << ',' << th[k] << ',' << ps[k] << '\n';
    }
}

std::string street_metadata_json(const StreetProfiles &st, const WeightedNorms *norms) {
  const StreetConfig &c = st.config;
  nlohmann::ordered_json j;
  j["s"] = c.s;
  j["l"] = c.l;
  j["a"] = c.a;
  j["eps"] = c.eps;
  j["sigma"] = c.sigma;
  j["gamma1"] = c.gamma1;
  j["gamma2"] = c.gamma2;
  j["W"] = st.geom.W;
  j["W_street"] = st.geom.W_street;
  j["d"] = st.geom.d;
  j["r_cut"] = st.geom.r_cut;
  j["truncation_K"] = c.trunc.truncation_K;
  j["tail"] = tail_mode_name(c.trunc.tail);
  j["tolerance"] = c.trunc.tolerance;
  j["allow_degenerate"] = c.allow_degenerate;
  j["p"] = {st.geom.p.x1, st.geom.p.x2};
  j["q"] = {st.geom.q.x1, st.geom.q.x2};
  j["lambda_plus"] = st.lambda_plus;
  j["lambda_minus"] = st.lambda_minus;
  j["mu_plus"] = st.plus.scale.mu;
  j["mu_minus"] = st.minus.scale.mu;
  j["mass_plus"] = st.plus.profile.mass;
  j["mass_minus"] = st.minus.profile.mass;
  auto L = support_radii(st);
  j["L_plus"] = L.first;
  j["L_minus"] = L.second;
  if (norms) {
    j["norm_star"] = norms->star;
    j["norm_starstar"] = norms->starstar;
    j["rho_floor"] = norms->rho_floor;
  }
  return j.dump(2);
}

} // namespace karman
