#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "karman/errors.hpp"
#include "karman/kernels.hpp"
#include "karman/spectral.hpp"

namespace karman {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double hermitian_weight(const SpectralGrid &g, int ix) {
  return (ix == 0 || ix == g.nx() / 2) ? 1.0 : 2.0;
}

// sum over the half spectrum of w |c|^2 m, converted to a physical integral
template <class M> double quadratic_form(const SpectralGrid &g, const Spectrum &c, M &&m) {
  const int h = g.nxh();
  double acc = 0.0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < h; ++i)
      acc += hermitian_weight(g, i) * std::norm(c[static_cast<std::size_t>(j) * h + i]) * m(j, i);
  const double n = static_cast<double>(g.nx()) * g.ny();
  return acc * g.Lx() * g.Ly() / (n * n);
}

} // namespace

GsqgSolver::GsqgSolver(const BoxField &theta0, double s, const SolverOptions &opt)
    : grid_(std::make_unique<SpectralGrid>(theta0.nx, theta0.ny, theta0.Lx, theta0.Ly)), s_(s),
      opt_(opt), Lx_(theta0.Lx), Ly_(theta0.Ly) {
  if (!(s > 0.0 && s <= 1.0))
    throw DomainError("gSQG solver: s must lie in (0,1]");
  if (!(opt.dealias > 0.0 && opt.dealias <= 1.0))
    throw DomainError("gSQG solver: dealias fraction must lie in (0,1]");
  if (!(opt.cfl > 0.0) || opt.filter < 0.0)
    throw DomainError("gSQG solver: cfl must be > 0 and filter >= 0");
  const SpectralGrid &g = *grid_;
  const int h = g.nxh();
  const double cx = opt.dealias * g.nx() / 2.0, cy = opt.dealias * g.ny() / 2.0;
  mask_.assign(g.modes(), 0.0);
  inv_lap_.assign(g.modes(), 0.0);
  for (int j = 0; j < g.ny(); ++j) {
    const int my = j <= g.ny() / 2 ? j : g.ny() - j;
    for (int i = 0; i < h; ++i) {
      std::size_t k = static_cast<std::size_t>(j) * h + i;
      double a = g.k1(i), b = g.k2(j), k2 = a * a + b * b;
      inv_lap_[k] = k2 > 0.0 ? std::pow(k2, -s) : 0.0;
      double rel = std::max(i / cx, my / cy);
      if (rel <= 1.0 && !g.nyquist(j, i))
        mask_[k] = opt.filter > 0.0 ? std::exp(-opt.filter * std::pow(rel, 16)) : 1.0;
    }
  }
  if (opt.parallel)
    g.forward(theta0.values, theta_hat_);
  else
    g.forward_serial(theta0.values, theta_hat_);
  for (std::size_t k = 0; k < theta_hat_.size(); ++k)
    theta_hat_[k] *= mask_[k];
}

GsqgSolver::~GsqgSolver() = default;

void GsqgSolver::rhs(const Spectrum &th, Spectrum &out, double *vmax) const {
  const SpectralGrid &g = *grid_;
  const int h = g.nxh();
  const std::size_t m = g.modes();
  const std::complex<double> I(0.0, 1.0);
  Spectrum v1(m), v2(m), d1(m), d2(m);
#pragma omp parallel for schedule(static) if (opt_.parallel)
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < h; ++i) {
      std::size_t k = static_cast<std::size_t>(j) * h + i;
      const double a = g.k1(i), b = g.k2(j);
      const std::complex<double> psi = th[k] * inv_lap_[k];
      v1[k] = I * b * psi;
      v2[k] = -I * a * psi;
      d1[k] = I * a * th[k];
      d2[k] = I * b * th[k];
    }
  std::vector<double> r1, r2, s1, s2;
  auto inv = [&](const Spectrum &c, std::vector<double> &o) {
    opt_.parallel ? g.inverse(c, o) : g.inverse_serial(c, o);
  };
  inv(v1, r1);
  inv(v2, r2);
  inv(d1, s1);
  inv(d2, s2);
  const double u = frame_from(th);
  for (double &v : r2)
    v += u;
  const std::size_t n = r1.size();
  std::vector<double> prod(n);
  double vm = 0.0;
#pragma omp parallel for schedule(static) reduction(max : vm) if (opt_.parallel)
  for (std::size_t k = 0; k < n; ++k) {
    prod[k] = r1[k] * s1[k] + r2[k] * s2[k];
    vm = std::max(vm, std::hypot(r1[k], r2[k]));
  }
  if (vmax)
    *vmax = vm;
  opt_.parallel ? g.forward(prod, out) : g.forward_serial(prod, out);
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] *= -mask_[k];
}

void GsqgSolver::step(double dt) {
  if (!(dt > 0.0))
    throw DomainError("time step must be > 0");
  const std::size_t m = theta_hat_.size();
  const double h = std::min(grid_->Lx() / grid_->nx(), grid_->Ly() / grid_->ny());
  Spectrum k1, k2, k3, k4, tmp(m);
  double vmax = 0.0;
  rhs(theta_hat_, k1, &vmax);
  if (vmax * dt / h > opt_.cfl) {
    std::ostringstream os;
    os << "CFL number " << vmax * dt / h << " exceeds " << opt_.cfl << " (max|v|=" << vmax
       << ", h=" << h << ", dt=" << dt << ")";
    throw CflError(os.str(), 0.9 * opt_.cfl * h / vmax);
  }
  for (std::size_t k = 0; k < m; ++k)
    tmp[k] = theta_hat_[k] + 0.5 * dt * k1[k];
  rhs(tmp, k2, nullptr);
  for (std::size_t k = 0; k < m; ++k)
    tmp[k] = theta_hat_[k] + 0.5 * dt * k2[k];
  rhs(tmp, k3, nullptr);
  for (std::size_t k = 0; k < m; ++k)
    tmp[k] = theta_hat_[k] + dt * k3[k];
  rhs(tmp, k4, nullptr);
  for (std::size_t k = 0; k < m; ++k)
    theta_hat_[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
  t_ += dt;
}

BoxField GsqgSolver::theta() const {
  BoxField f(grid_->nx(), grid_->ny(), Lx_, Ly_);
  opt_.parallel ? grid_->inverse(theta_hat_, f.values) : grid_->inverse_serial(theta_hat_, f.values);
  return f;
}

VelocityField GsqgSolver::velocity() const {
  const SpectralGrid &g = *grid_;
  const int h = g.nxh();
  const std::complex<double> I(0.0, 1.0);
  Spectrum c1(g.modes()), c2(g.modes());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < h; ++i) {
      std::size_t k = static_cast<std::size_t>(j) * h + i;
      const std::complex<double> psi = g.nyquist(j, i) ? 0.0 : theta_hat_[k] * inv_lap_[k];
      c1[k] = I * g.k2(j) * psi;
      c2[k] = -I * g.k1(i) * psi;
    }
  VelocityField v{BoxField(g.nx(), g.ny(), Lx_, Ly_), BoxField(g.nx(), g.ny(), Lx_, Ly_)};
  g.inverse(c1, v.v1.values);
  g.inverse(c2, v.v2.values);
  const double u = frame_from(theta_hat_);
  for (double &x : v.v2.values)
    x += u;
  return v;
}

double GsqgSolver::frame_from(const Spectrum &th) const {
  if (!opt_.strip_frame || s_ < 1.0 - kUnitExponentSnap)
    return 0.0;
  // row average of v2 on the grid column x1 = -Lx/2, from the k2 = 0 row
  const SpectralGrid &g = *grid_;
  double acc = 0.0;
  for (int i = 1; i < g.nxh() - 1; ++i)
    acc += (std::complex<double>(0.0, -g.k1(i)) * th[i] * inv_lap_[i]).real();
  return -2.0 * acc / (static_cast<double>(g.nx()) * g.ny());
}

double GsqgSolver::frame_velocity() const { return frame_from(theta_hat_); }

double GsqgSolver::max_speed() const {
  auto v = velocity();
  double m = 0.0;
  for (std::size_t k = 0; k < v.v1.values.size(); ++k)
    m = std::max(m, std::hypot(v.v1.values[k], v.v2.values[k]));
  return m;
}

double GsqgSolver::casimir1() const {
  return theta_hat_[0].real() * Lx_ * Ly_ / (static_cast<double>(grid_->nx()) * grid_->ny());
}

double GsqgSolver::casimir2() const {
  return quadratic_form(*grid_, theta_hat_, [](int, int) { return 1.0; });
}

double GsqgSolver::hamiltonian() const {
  const int h = grid_->nxh();
  return quadratic_form(*grid_, theta_hat_, [&](int j, int i) {
    return inv_lap_[static_cast<std::size_t>(j) * h + i];
  });
}

BoxField step_rk4(const BoxField &theta, double s, double dt, const SolverOptions &options) {
  GsqgSolver solver(theta, s, options);
  solver.step(dt);
  return solver.theta();
}

Vec2 positive_centroid(const BoxField &f) {
  double w = 0.0, x1 = 0.0, c = 0.0, sn = 0.0;
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i) {
      Vec2 x = f.point(i, j);
      double v = f.at(i, j);
      if (x.x1 >= 0.0 || v <= 0.0)
        continue;
      double ph = kTwoPi * x.x2 / f.Ly;
      w += v;
      x1 += v * x.x1;
      c += v * std::cos(ph);
      sn += v * std::sin(ph);
    }
  if (!(w > 0.0))
    throw DomainError("positive centroid: no positive vorticity in x1 < 0");
  return {x1 / w, std::atan2(sn, c) * f.Ly / kTwoPi};
}

namespace {

struct ShapeFit {
  double error, shift;
};

// min over tau of |theta - theta0(. - tau e2)| / |theta0|, searched near guess
ShapeFit shape_error(const SpectralGrid &g, const Spectrum &th, const Spectrum &th0,
                     double norm0_sq, double guess) {
  const int h = g.nxh();
  const double n = static_cast<double>(g.nx()) * g.ny();
  const double scale = g.Lx() * g.Ly() / (n * n);
  std::vector<std::complex<double>> cross(g.ny());
  double nrm = 0.0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < h; ++i) {
      std::size_t k = static_cast<std::size_t>(j) * h + i;
      double w = hermitian_weight(g, i) * scale;
      cross[j] += w * std::conj(th[k]) * th0[k];
      nrm += w * std::norm(th[k]);
    }
  auto f = [&](double tau) {
    double ip = 0.0;
    for (int j = 0; j < g.ny(); ++j) {
      double ph = g.k2(j) * tau;
      ip += j == g.ny() / 2 ? cross[j].real() * std::cos(ph)
                            : (cross[j] * std::polar(1.0, -ph)).real();
    }
    return nrm + norm0_sq - 2.0 * ip;
  };
  const double win = g.Ly() / 8.0;
  auto r = boost::math::tools::brent_find_minima(f, guess - win, guess + win, 40);
  return {std::sqrt(std::max(0.0, r.second) / norm0_sq), r.first};
}

} // namespace

TravellingReport run_travelling_test(const BoxField &theta0, double s, double W,
                                     const TravellingOptions &opt) {
  if (!(opt.T > 0.0 && opt.dt > 0.0) || opt.sample_every < 1)
    throw DomainError("travelling test needs T > 0, dt > 0 and sample_every >= 1");
  validate_box(theta0.nx, theta0.ny, theta0.Lx, theta0.Ly);
  GsqgSolver solver(theta0, s, opt.solver);
  const SpectralGrid &g = solver.grid();
  const Spectrum th0 = solver.spectrum();
  const double norm0_sq = solver.casimir2();
  BoxField f0 = solver.theta();
  const double max0 = f0.max_abs();
  const Vec2 c0 = positive_centroid(f0);

  TravellingReport rep;
  rep.W_expected = W;
  const long n = std::max(1L, std::lround(std::ceil(opt.T / opt.dt - 1e-9)));
  const double dt = opt.T / n;
  double unwrapped = c0.x2, last_raw = c0.x2;

  auto record = [&](const BoxField &f) {
    TravellingSample smp;
    smp.t = solver.time();
    Vec2 c = positive_centroid(f);
    double jump = c.x2 - last_raw;
    jump -= f.Ly * std::round(jump / f.Ly);
    unwrapped += jump;
    last_raw = c.x2;
    smp.centroid_x1 = c.x1;
    smp.centroid_x2 = unwrapped;
    if (!rep.samples.empty()) {
      const auto &p = rep.samples.back();
      smp.W_inst = (smp.centroid_x2 - p.centroid_x2) / (smp.t - p.t);
    }
    auto fit = shape_error(g, solver.spectrum(), th0, norm0_sq, unwrapped - c0.x2);
    smp.shape_error = fit.error;
    smp.shift = fit.shift;
    smp.casimir1 = solver.casimir1();
    smp.casimir2 = solver.casimir2();
    smp.hamiltonian = solver.hamiltonian();
    rep.samples.push_back(smp);
  };

  record(f0);
  if (opt.observer)
    opt.observer(0, f0);
  for (long k = 1; k <= n; ++k) {
    solver.step(dt);
    rep.steps = static_cast<int>(k);
    if (k % opt.sample_every == 0 || k == n) {
      BoxField f = solver.theta();
      if (f.max_abs() > 10.0 * max0) {
        std::ostringstream os;
        os << "max|theta| grew from " << max0 << " to " << f.max_abs() << " at t=" << solver.time();
        rep.unstable = true;
        rep.message = os.str();
        break;
      }
      record(f);
      if (opt.observer)
        opt.observer(k, f);
    }
  }

  const auto &a = rep.samples.front(), &b = rep.samples.back();
  double st = 0, sx = 0, stt = 0, stx = 0;
  for (const auto &smp : rep.samples) {
    st += smp.t;
    sx += smp.centroid_x2;
    stt += smp.t * smp.t;
    stx += smp.t * smp.centroid_x2;
    rep.x1_drift = std::max(rep.x1_drift, std::abs(smp.centroid_x1 - a.centroid_x1));
  }
  const double m = rep.samples.size();
  rep.W_measured = m > 1 ? (m * stx - st * sx) / (m * stt - st * st) : 0.0;
  rep.shape_error = b.shape_error;
  rep.casimir1_drift = std::abs(b.casimir1 - a.casimir1);
  rep.casimir2_drift = std::abs(b.casimir2 - a.casimir2) / a.casimir2;
  rep.hamiltonian_drift =
      a.hamiltonian != 0.0 ? std::abs(b.hamiltonian - a.hamiltonian) / std::abs(a.hamiltonian) : 0.0;
  return rep;
}

void write_travelling_csv(const TravellingReport &rep, std::ostream &out) {
  out << "t,centroid_x1,centroid_x2,W_inst,l2_shape_err,casimir1,casimir2,hamiltonian\n"
      << std::setprecision(17);
  for (const auto &s : rep.samples)
    out << s.t << ',' << s.centroid_x1 << ',' << s.centroid_x2 << ',' << s.W_inst << ','
        << s.shape_error << ',' << s.casimir1 << ',' << s.casimir2 << ',' << s.hamiltonian
        << '\n';
}

} // namespace karman
