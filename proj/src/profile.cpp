#include "karman/plasma.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/tools/roots.hpp>
#include "json.hpp"

#include "karman/errors.hpp"
#include "karman/kernels.hpp"

namespace karman {

using Hermite = boost::math::interpolators::cubic_hermite<std::vector<double>>;

struct RadialProfile::Interp {
  Hermite spline;
  // fractional exterior: w = r^{2-2s} U is nearly flat, so interpolate it instead
  std::optional<Hermite> tail;
  double tail_start = INFINITY;
};

RadialProfile::RadialProfile(ProfileKind kind_, double s_, double gamma_,
                             std::vector<double> radii, std::vector<double> values,
                             std::vector<double> derivatives)
    : kind(kind_), s(s_), gamma(gamma_), radii_(radii), values_(values), derivs_(derivatives) {
  auto in = std::make_shared<Interp>(Interp{Hermite{std::vector<double>(radii), std::vector<double>(values),
                                                    std::vector<double>(derivatives)},
                                            {}, INFINITY});
  if (kind == ProfileKind::fractional) {
    std::vector<double> r, w, dw;
    const double e = 2.0 - 2.0 * s;
    for (std::size_t i = 0; i < radii.size(); ++i) {
      if (radii[i] < 1.0)
        continue;
      double re = std::pow(radii[i], e);
      r.push_back(radii[i]);
      w.push_back(re * values[i]);
      dw.push_back(re * derivatives[i] + e * re / radii[i] * values[i]);
    }
    if (r.size() >= 4) {
      in->tail_start = r.front();
      in->tail.emplace(std::move(r), std::move(w), std::move(dw));
    }
  }
  interp_ = std::move(in);
}

double RadialProfile::value(double r) const {
  r = std::abs(r);
  if (kind == ProfileKind::fractional && (r >= far_start_ || r > radii_.back()))
    return far_coefficient * std::pow(r, 2.0 * s - 2.0) * (1.0 + far_b_ / (r * r));
  if (r >= interp_->tail_start)
    return interp_->tail.value()(r) * std::pow(r, 2.0 * s - 2.0);
  if (r <= radii_.back())
    return interp_->spline(r);
  return 0.0;
}

double RadialProfile::derivative(double r) const {
  r = std::abs(r);
  const double e = 2.0 * s - 2.0;
  if (kind == ProfileKind::fractional && (r >= far_start_ || r > radii_.back()))
    return far_coefficient * std::pow(r, e - 1.0) * (e + (e - 2.0) * far_b_ / (r * r));
  if (r >= interp_->tail_start) {
    const double re = std::pow(r, e);
    return re * (interp_->tail->prime(r) + e / r * (*interp_->tail)(r));
  }
  if (r <= radii_.back())
    return interp_->spline.prime(r);
  return 0.0;
}

void RadialProfile::attach_far_field(double coefficient, double match_radius) {
  if (kind != ProfileKind::fractional)
    throw DomainError("far-field expansion applies to fractional profiles only");
  far_coefficient = coefficient;
  far_b_ = 0.0;
  far_start_ = INFINITY;
  if (!(match_radius >= interp_->tail_start && match_radius < radii_.back()))
    return;
  const double lead = coefficient * std::pow(match_radius, 2.0 * s - 2.0);
  far_b_ = (value(match_radius) / lead - 1.0) * match_radius * match_radius;
  far_start_ = match_radius;
}

std::vector<double> derivative_weights(double x0, const std::vector<double> &x) {
  // Fornberg's recursion, derivative orders 0 and 1
  const std::size_t n = x.size();
  std::vector<std::vector<double>> c0(n, std::vector<double>(n, 0.0)), c1 = c0;
  c0[0][0] = 1.0;
  double c1v = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    double c2 = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        c1[i][i] = c1v * (c0[i - 1][i - 1] - (x[i - 1] - x0) * c1[i - 1][i - 1]) / c2;
        c0[i][i] = -c1v * (x[i - 1] - x0) * c0[i - 1][i - 1] / c2;
      }
      c1[i][j] = ((x[i] - x0) * c1[i - 1][j] - c0[i - 1][j]) / c3;
      c0[i][j] = (x[i] - x0) * c0[i - 1][j] / c3;
    }
    c1v = c2;
  }
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j)
    w[j] = c1[n - 1][j];
  return w;
}

void validate_fractional_gamma(double s, double gamma) {
  if (!(s > 0.0 && s < 1.0))
    throw DomainError("fractional plasma problem requires 0 < s < 1");
  double upper = (2.0 + 2.0 * s) / (2.0 - 2.0 * s);
  if (!(gamma > 1.0 && gamma < upper)) {
    std::ostringstream os;
    os << "gamma=" << gamma << " outside the admissible range 1 < gamma < (2+2s)/(2-2s) = "
       << upper;
    throw DomainError(os.str());
  }
}

namespace {

double scale_exponent(const RadialProfile &p) {
  return 2.0 - 2.0 * p.s * p.gamma / (p.gamma - 1.0);
}

} // namespace

SignScale fractional_scales(const RadialProfile &p) {
  if (p.kind != ProfileKind::fractional)
    throw DomainError("fractional_scales needs a fractional profile");
  double e = scale_exponent(p);
  if (std::abs(e) < 1e-12) {
    std::ostringstream os;
    os << "degenerate exponent: gamma=" << p.gamma << " equals the excluded value 1/(1-s)="
       << 1.0 / (1.0 - p.s) << ", so M mu^{2-2s gamma/(gamma-1)} = 1 has no solution";
    throw DomainError(os.str());
  }
  if (!(p.mass > 0.0))
    throw DomainError("fractional_scales: profile mass must be positive");
  SignScale sc;
  sc.mu = std::pow(p.mass, -1.0 / e);
  return sc;
}

SignScale fractional_scales_degenerate(const RadialProfile &p) {
  if (p.kind != ProfileKind::fractional)
    throw DomainError("fractional_scales needs a fractional profile");
  SignScale sc;
  sc.mu = 1.0;
  sc.degenerate = true;
  return sc;
}

SignScale matching_scales_s1(const RadialProfile &p, double lambda, double eps) {
  if (p.kind != ProfileKind::dirichlet)
    throw DomainError("matching_scales_s1 needs a Dirichlet profile");
  if (!(eps > 0.0 && eps < 1.0))
    throw DomainError("matching_scales_s1: eps must lie in (0,1)");
  if (!(lambda > 0.0))
    throw DomainError("matching_scales_s1: lambda must be > 0");
  const double q = 2.0 / (p.gamma - 1.0);
  const double dv = std::abs(p.boundary_derivative);
  const double rhs = lambda / (2.0 * std::numbers::pi) * std::abs(std::log(eps));
  // F(m) in m = ln mu on (-inf, ln(1/eps)); decreasing
  auto F = [&](double m) { return dv * std::exp(-q * m) * (-m - std::log(eps)) - rhs; };
  double hi = -std::log(eps) * (1.0 - 1e-15);
  double lo = -1.0;
  int expand = 0;
  while (F(lo) <= 0.0) {
    lo -= 2.0 * (1.0 + std::abs(lo));
    if (++expand > 60)
      throw MatchingError("C1 matching: no root in a wide bracket");
  }
  if (F(hi) >= 0.0)
    throw MatchingError("C1 matching: no root below mu = 1/eps");
  boost::uintmax_t iters = 300;
  auto res = boost::math::tools::toms748_solve(F, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  SignScale sc;
  sc.mu = std::exp(0.5 * (res.first + res.second));
  sc.patch_radius = sc.mu * eps;
  sc.lambda = lambda;
  return sc;
}

void write_profile_csv(const RadialProfile &p, std::ostream &out) {
  out << "r,U\n" << std::setprecision(17);
  for (std::size_t i = 0; i < p.radii().size(); ++i)
    out << p.radii()[i] << ',' << p.values()[i] << '\n';
}

std::string profile_sidecar_json(const RadialProfile &p, double mu) {
  nlohmann::ordered_json j;
  j["kind"] = p.kind == ProfileKind::fractional ? "fractional" : "dirichlet";
  j["s"] = p.s;
  j["gamma"] = p.gamma;
  j["M_gamma"] = p.mass;
  j["mu"] = mu;
  j["core_radius"] = p.core_radius;
  if (p.kind == ProfileKind::fractional)
    j["far_coefficient"] = p.far_coefficient;
  else
    j["boundary_derivative"] = p.boundary_derivative;
  j["iterations"] = p.iterations;
  j["last_change"] = p.last_change;
  return j.dump(2);
}

} // namespace karman
