#include "karman/street.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "karman/errors.hpp"

namespace karman {

namespace {

constexpr double kPi = std::numbers::pi;

void check_scale(const char *name, double v) {
  if (!(v > 0.0 && v < 1.0)) {
    std::ostringstream os;
    os << name << "=" << v << " must lie in (0,1)";
    throw DomainError(os.str());
  }
}

} // namespace

bool is_degenerate(double s, double gamma) {
  return s < 1.0 && std::abs(gamma - 1.0 / (1.0 - s)) < 1e-12;
}

void validate_street_config(const StreetConfig &c) {
  SQGParams prm = coupling_constants(c.s);
  if (!(c.l > 0.0))
    throw DomainError("period l must be > 0");
  if (!(c.a == 0.0 || is_staggered(c.a, c.l))) {
    std::ostringstream os;
    os << "stagger a=" << c.a << " must be 0 or l/4=" << c.l / 4;
    throw DomainError(os.str());
  }
  check_scale("eps", c.eps);
  check_scale("sigma", c.sigma);
  for (double g : {c.gamma1, c.gamma2}) {
    if (prm.log_kernel) {
      if (!(g > 1.0)) {
        std::ostringstream os;
        os << "gamma=" << g << " violates 1 < gamma < infinity (s = 1)";
        throw DomainError(os.str());
      }
      continue;
    }
    validate_fractional_gamma(prm.s, g);
    if (is_degenerate(prm.s, g) && !c.allow_degenerate) {
      std::ostringstream os;
      os << "gamma=" << g << " equals the excluded exponent 1/(1-s)=" << 1.0 / (1.0 - prm.s)
         << " (gamma1, gamma2 != 1/(1-s)); enable allow_degenerate for the unit-mu variant";
      throw DomainError(os.str());
    }
  }
  if (!prm.log_kernel && c.allow_degenerate &&
      (is_degenerate(prm.s, c.gamma1) || is_degenerate(prm.s, c.gamma2)) &&
      c.gamma1 != c.gamma2)
    throw DomainError("degenerate exponent requires gamma1 = gamma2 (equal circulations)");
  if (!c.W && !c.d)
    throw DomainError("street config needs W or d");
  if (c.W && !(*c.W > 0.0))
    throw DomainError("target speed W must be > 0");
  if (c.d && !(*c.d > 0.0))
    throw DomainError("half-distance d must be > 0");
  if (c.r_cut && !(*c.r_cut > 0.0))
    throw DomainError("r_cut must be > 0");
  validate_policy(c.trunc);
}

ResolvedGeometry resolve_geometry(const StreetConfig &c, double circulation) {
  validate_street_config(c);
  if (!(circulation > 0.0))
    throw DomainError("circulation must be > 0");
  ResolvedGeometry g;
  if (c.d) {
    g.d = *c.d;
  } else {
    try {
      g.d = solve_street_distance(*c.W / circulation, c.l, c.a, c.s, c.trunc, c.branch);
    } catch (const FeasibilityError &e) {
      if (circulation == 1.0)
        throw;
      // report the range for the actual circulation
      const double lo = e.lower() * circulation, hi = e.upper() * circulation;
      std::ostringstream os;
      os << "infeasible target speed W=" << *c.W << " for circulation " << circulation
         << ": admissible range is (" << lo << ", " << hi << ")";
      throw FeasibilityError(os.str(), lo, hi);
    }
  }
  g.W_street = circulation * street_speed({g.d, c.l, c.a, c.s}, c.trunc).value;
  g.W = c.W ? *c.W : g.W_street;
  g.p = {-g.d, -c.a};
  g.q = {g.d, c.a};
  g.r_cut = c.r_cut ? *c.r_cut : std::min(g.d, c.l / 4.0) / 2.0;
  double sep = INFINITY;
  for (int k = -1; k <= 1; ++k)
    sep = std::min(sep, norm(g.p - g.q + Vec2{0.0, k * c.l}));
  if (!(2.0 * g.r_cut < sep)) {
    std::ostringstream os;
    os << "balls B_r(p), B_r(q) with r=" << g.r_cut << " overlap (separation " << sep << ")";
    throw DomainError(os.str());
  }
  if (std::abs(g.p.x2) + g.r_cut > c.l / 2.0) {
    std::ostringstream os;
    os << "ball B_r(p) with r=" << g.r_cut << " leaves the typical period";
    throw DomainError(os.str());
  }
  return g;
}

double street_circulation(const StreetConfig &c, const RadialPair &radials) {
  SQGParams prm = coupling_constants(c.s);
  if (!prm.log_kernel && c.allow_degenerate && is_degenerate(prm.s, c.gamma1))
    return radials.plus.mass;
  return 1.0;
}

RadialPair solve_street_radials(const StreetConfig &c) {
  validate_street_config(c);
  SQGParams prm = coupling_constants(c.s);
  auto one = [&](double gamma) {
    if (prm.log_kernel)
      return solve_plasma_dirichlet(gamma, c.plasma_tolerance);
    return solve_plasma_fractional(prm.s, gamma, c.plasma_grid, c.plasma_tolerance);
  };
  RadialPair r;
  r.plus = one(c.gamma1);
  r.minus = c.gamma2 == c.gamma1 ? r.plus : one(c.gamma2);
  return r;
}

namespace {

// s = 1: lambda = ln(1/s_pm)/ln(1/eps) with s_pm = mu eps from the C1 matching
SignScale iterate_s1_scale(const RadialProfile &prof, double e, int &iterations) {
  double lambda = 1.0;
  SignScale sc;
  for (int it = 1; it <= 100; ++it) {
    sc = matching_scales_s1(prof, lambda, e);
    if (!(sc.patch_radius < 1.0))
      throw MatchingError("s=1 matching: patch radius mu*eps >= 1");
    double next = std::log(1.0 / sc.patch_radius) / std::log(1.0 / e);
    double change = std::abs(next - lambda);
    lambda = next;
    iterations = std::max(iterations, it);
    if (change < 1e-12) {
      sc = matching_scales_s1(prof, lambda, e);
      sc.lambda = lambda;
      return sc;
    }
  }
  throw MatchingError("s=1 lambda/scale fixed point did not converge");
}

Patch make_patch(const SQGParams &prm, const RadialProfile &prof, double e, double gamma,
                 bool allow_degenerate, int sign, int &iterations) {
  Patch P;
  P.profile = prof;
  P.scale_eps = e;
  P.gamma = gamma;
  P.sign = sign;
  if (prm.log_kernel) {
    P.scale = iterate_s1_scale(prof, e, iterations);
    P.length = P.scale.patch_radius;
    P.amplitude = std::pow(P.scale.mu, -2.0 / (gamma - 1.0));
    P.level = std::log(1.0 / P.length) / (2.0 * kPi);
    P.eta = 1.0;
    P.source_factor = 1.0 / (e * e);
    P.circulation = 1.0;
    P.core_radius = P.length;
    P.support_radius = P.length;
    return P;
  }
  const double s = prm.s;
  P.scale = (allow_degenerate && is_degenerate(s, gamma)) ? fractional_scales_degenerate(prof)
                                                          : fractional_scales(prof);
  const double mu = P.scale.mu;
  const double A = std::pow(mu, -2.0 * s / (gamma - 1.0));
  P.length = e * mu;
  P.amplitude = std::pow(e, 2.0 * s - 2.0) * A;
  P.level = P.amplitude;
  P.eta = std::pow(e, 2.0 - 2.0 * s);
  P.source_factor = std::pow(P.eta, gamma) / (e * e);
  P.circulation = P.scale.degenerate ? prof.mass : 1.0;
  P.core_radius = P.length * prof.core_radius;
  P.support_radius = P.length * prof.max_radius();
  return P;
}

} // namespace

StreetProfiles build_street(const StreetConfig &c, const RadialPair &radials) {
  StreetProfiles st;
  st.config = c;
  st.params = coupling_constants(c.s);
  int it = 0;
  st.plus = make_patch(st.params, radials.plus, c.eps, c.gamma1, c.allow_degenerate, 1, it);
  st.minus = make_patch(st.params, radials.minus, c.sigma, c.gamma2, c.allow_degenerate, -1, it);
  if (std::abs(st.plus.circulation - st.minus.circulation) > 1e-12 * st.plus.circulation)
    throw DomainError("rows must carry equal circulation for the image sums to converge");
  st.geom = resolve_geometry(c, st.plus.circulation);
  st.plus.center = st.geom.p;
  st.minus.center = st.geom.q;
  for (const Patch *P : {&st.plus, &st.minus}) {
    if (!(P->core_radius < st.geom.r_cut)) {
      std::ostringstream os;
      os << "vortex core radius " << P->core_radius << " exceeds r_cut=" << st.geom.r_cut
         << "; enlarge l and d or set r_cut";
      throw DomainError(os.str());
    }
  }
  Lambdas lam = compute_lambdas(st);
  st.lambda_plus = lam.plus;
  st.lambda_minus = lam.minus;
  st.threshold_plus = lam.threshold_plus;
  st.threshold_minus = lam.threshold_minus;
  st.lambda_iterations = lam.iterations;
  return st;
}

StreetProfiles make_street_profiles(const StreetConfig &config) {
  return build_street(config, solve_street_radials(config));
}

// ---- profile pieces ----

double patch_value(const Patch &P, double r) {
  if (P.profile.kind == ProfileKind::dirichlet) {
    if (r <= P.length)
      return P.level + P.amplitude * P.profile.value(r / P.length);
    return std::log(1.0 / r) / (2.0 * kPi);
  }
  return P.amplitude * P.profile.value(r / P.length);
}

double patch_radial_derivative(const Patch &P, double r) {
  if (P.profile.kind == ProfileKind::dirichlet) {
    if (r <= P.length)
      return P.amplitude * P.profile.derivative(r / P.length) / P.length;
    return -1.0 / (2.0 * kPi * r);
  }
  return P.amplitude * P.profile.derivative(r / P.length) / P.length;
}

namespace {

// radial derivative of G_s
double green_radial_derivative(const SQGParams &prm, double r) {
  return -prm.calC_s * std::pow(r, 2.0 * prm.s - 3.0);
}

// profile minus its far-field point vortex; zero beyond the support radius
double defect(const SQGParams &prm, const Patch &P, Vec2 y) {
  double r = norm(y);
  if (r >= P.support_radius)
    return 0.0;
  return patch_value(P, r) - P.circulation * green_kernel(prm, y);
}

double defect_dx1(const SQGParams &prm, const Patch &P, Vec2 y) {
  double r = norm(y);
  if (r >= P.support_radius)
    return 0.0;
  double dr = patch_radial_derivative(P, r) - P.circulation * green_radial_derivative(prm, r);
  return dr * y.x1 / r;
}

bool no_image_in_support(const Patch &P, Vec2 y, double l) {
  return l - std::abs(y.x2) > P.support_radius;
}

// sum_{k != 0} defect(y + k l e2)
double defect_rest(const StreetProfiles &st, const Patch &P, Vec2 y) {
  const double l = st.config.l;
  if (no_image_in_support(P, y, l))
    return 0.0;
  auto term = [&](long k) {
    double h = k * l;
    return defect(st.params, P, y + Vec2{0.0, h}) + defect(st.params, P, y - Vec2{0.0, h});
  };
  return sum_series(term, 4.0 - 2.0 * st.params.s, st.config.trunc).value;
}

double defect_dx1_rest(const StreetProfiles &st, const Patch &P, Vec2 y) {
  const double l = st.config.l;
  if (no_image_in_support(P, y, l))
    return 0.0;
  auto term = [&](long k) {
    double h = k * l;
    return defect_dx1(st.params, P, y + Vec2{0.0, h}) +
           defect_dx1(st.params, P, y - Vec2{0.0, h});
  };
  return sum_series(term, 4.0 - 2.0 * st.params.s, st.config.trunc).value;
}

// sum_{k != 0} [G(y + k l e2) - G(z + k l e2)], symmetric pairs
double pair_rest(const StreetProfiles &st, Vec2 y, Vec2 z) {
  const double l = st.config.l;
  auto term = [&](long k) {
    double h = k * l;
    return green_shift_difference(st.params, y, z, h) +
           green_shift_difference(st.params, y, z, -h);
  };
  return sum_series(term, 4.0 - 2.0 * st.params.s,
                    policy_for_extent(st.config.trunc, (norm(y) + norm(z)) / l))
      .value;
}

// sum_{k != 0} d/dx1 G(y + k l e2)
double green_dx1_rest(const StreetProfiles &st, Vec2 y) {
  const double l = st.config.l, e = st.params.s - 2.0;
  auto term = [&](long k) {
    double h = k * l;
    double a = y.x2 + h, b = y.x2 - h;
    return -st.params.calC_s * y.x1 *
           (std::pow(y.x1 * y.x1 + a * a, e) + std::pow(y.x1 * y.x1 + b * b, e));
  };
  return sum_series(term, 4.0 - 2.0 * st.params.s, policy_for_extent(st.config.trunc, norm(y) / l))
      .value;
}

Vec2 into_period(Vec2 x, double l) { return {x.x1, wrap_period(x.x2, l)}; }

struct StreamParts {
  double self_plus, self_minus, images;
};

StreamParts stream_parts(const StreetProfiles &st, Vec2 x) {
  Vec2 y = x - st.geom.p, z = x - st.geom.q;
  StreamParts sp;
  sp.self_plus = norm2(y) > 0 ? patch_value(st.plus, norm(y)) : patch_value(st.plus, 0.0);
  sp.self_minus = norm2(z) > 0 ? patch_value(st.minus, norm(z)) : patch_value(st.minus, 0.0);
  sp.images = st.plus.circulation * pair_rest(st, y, z) + defect_rest(st, st.plus, y) -
              defect_rest(st, st.minus, z);
  return sp;
}

} // namespace

double regular_part_plus(const StreetProfiles &st, Vec2 x) {
  x = into_period(x, st.config.l);
  auto sp = stream_parts(st, x);
  return -sp.self_minus + sp.images + st.geom.W * x.x1;
}

double regular_part_minus(const StreetProfiles &st, Vec2 x) {
  x = into_period(x, st.config.l);
  auto sp = stream_parts(st, x);
  return -sp.self_plus - sp.images - st.geom.W * x.x1;
}

Lambdas compute_lambdas(const StreetProfiles &st) {
  Lambdas L;
  double bp = regular_part_plus(st, st.geom.p);
  double bq = regular_part_minus(st, st.geom.q);
  L.threshold_plus = st.plus.level + bp;
  L.threshold_minus = st.minus.level + bq;
  if (st.params.log_kernel) {
    int it = 0;
    L.plus = iterate_s1_scale(st.plus.profile, st.config.eps, it).lambda;
    L.minus = iterate_s1_scale(st.minus.profile, st.config.sigma, it).lambda;
    L.iterations = it;
  } else {
    L.plus = st.plus.eta * L.threshold_plus;
    L.minus = st.minus.eta * L.threshold_minus;
    L.iterations = 0;
  }
  return L;
}

double assemble_stream(const StreetProfiles &st, Vec2 x) {
  x = into_period(x, st.config.l);
  auto sp = stream_parts(st, x);
  return sp.self_plus - sp.self_minus + sp.images;
}

namespace {

struct PatchState {
  int which = 0;       // +1 in B_r(p), -1 in B_r(q), 0 elsewhere
  double profile = 0.0; // P(|x - center|)
  double inner = 0.0;   // argument of the positive part in the nonlinearity
};

PatchState patch_state(const StreetProfiles &st, Vec2 x) {
  PatchState ps;
  const double r = st.geom.r_cut;
  Vec2 y = x - st.geom.p, z = x - st.geom.q;
  if (norm(y) < r) {
    ps.which = 1;
    ps.profile = patch_value(st.plus, norm(y));
    ps.inner = ps.profile + regular_part_plus(st, x) - st.threshold_plus;
  } else if (norm(z) < r) {
    ps.which = -1;
    ps.profile = patch_value(st.minus, norm(z));
    ps.inner = ps.profile + regular_part_minus(st, x) - st.threshold_minus;
  }
  return ps;
}

double pos_pow(double v, double g) { return v > 0.0 ? std::pow(v, g) : 0.0; }

} // namespace

double assemble_vorticity(const StreetProfiles &st, Vec2 x) {
  x = into_period(x, st.config.l);
  auto ps = patch_state(st, x);
  if (ps.which == 1)
    return st.plus.source_factor * pos_pow(ps.inner, st.plus.gamma);
  if (ps.which == -1)
    return -st.minus.source_factor * pos_pow(ps.inner, st.minus.gamma);
  return 0.0;
}

double linearized_potential(const StreetProfiles &st, Vec2 x) {
  x = into_period(x, st.config.l);
  auto ps = patch_state(st, x);
  if (ps.which == 1)
    return st.plus.source_factor * st.plus.gamma * pos_pow(ps.inner, st.plus.gamma - 1.0);
  if (ps.which == -1)
    return st.minus.source_factor * st.minus.gamma * pos_pow(ps.inner, st.minus.gamma - 1.0);
  return 0.0;
}

double residual_at(const StreetProfiles &st, Vec2 x) {
  x = into_period(x, st.config.l);
  auto ps = patch_state(st, x);
  if (ps.which == 1) {
    const Patch &P = st.plus;
    return P.source_factor * (pos_pow(ps.profile - P.level, P.gamma) - pos_pow(ps.inner, P.gamma));
  }
  if (ps.which == -1) {
    const Patch &P = st.minus;
    return P.source_factor *
           (pos_pow(ps.inner, P.gamma) - pos_pow(ps.profile - P.level, P.gamma));
  }
  return 0.0;
}

double kernel_mode_Z(const StreetProfiles &st, Vec2 x) {
  x = into_period(x, st.config.l);
  Vec2 y = x - st.geom.p, z = x - st.geom.q;
  auto self = [&](const Patch &P, Vec2 v) {
    double r = norm(v);
    return r > 0.0 ? patch_radial_derivative(P, r) * v.x1 / r : 0.0;
  };
  double z1 = self(st.plus, y) + st.plus.circulation * green_dx1_rest(st, y) +
              defect_dx1_rest(st, st.plus, y);
  double z2 = self(st.minus, z) + st.minus.circulation * green_dx1_rest(st, z) +
              defect_dx1_rest(st, st.minus, z);
  return z1 + z2;
}

} // namespace karman
