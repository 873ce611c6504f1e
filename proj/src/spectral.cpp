#include "karman/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include <fftw3.h>

#include "karman/errors.hpp"

namespace karman {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool power_of_two(int n) { return n >= 8 && (n & (n - 1)) == 0; }

// the FFTW planner is not thread-safe
std::mutex &planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex *as_fftw(std::complex<double> *p) { return reinterpret_cast<fftw_complex *>(p); }

} // namespace

BoxField::BoxField(int nx_, int ny_, double Lx_, double Ly_)
    : nx(nx_), ny(ny_), Lx(Lx_), Ly(Ly_), values(static_cast<std::size_t>(nx_) * ny_, 0.0) {}

double BoxField::integral() const {
  double s = 0.0;
  for (double v : values)
    s += v;
  return s * hx() * hy();
}

double BoxField::mean() const { return integral() / (Lx * Ly); }

double BoxField::max_abs() const {
  double m = 0.0;
  for (double v : values)
    m = std::max(m, std::abs(v));
  return m;
}

void validate_box(int nx, int ny, double Lx, double Ly) {
  if (!power_of_two(nx) || !power_of_two(ny)) {
    std::ostringstream os;
    os << "box grid " << nx << "x" << ny << " must use powers of two >= 8";
    throw DomainError(os.str());
  }
  if (!(Lx > 0.0 && Ly > 0.0))
    throw DomainError("box extents must be > 0");
}

struct SpectralGrid::Plans {
  fftw_plan row_r2c = nullptr, row_c2r = nullptr;
  fftw_plan col_fwd = nullptr, col_bwd = nullptr;
  fftw_plan full_r2c = nullptr, full_c2r = nullptr;
  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    for (fftw_plan p : {row_r2c, row_c2r, col_fwd, col_bwd, full_r2c, full_c2r})
      if (p)
        fftw_destroy_plan(p);
  }
};

SpectralGrid::SpectralGrid(int nx, int ny, double Lx, double Ly)
    : nx_(nx), ny_(ny), Lx_(Lx), Ly_(Ly), plans_(std::make_unique<Plans>()) {
  validate_box(nx, ny, Lx, Ly);
  const int h = nxh();
  std::vector<double> r(static_cast<std::size_t>(nx) * ny);
  Spectrum c(modes());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard<std::mutex> lock(planner_mutex());
  plans_->row_r2c = fftw_plan_dft_r2c_1d(nx, r.data(), as_fftw(c.data()), flags);
  plans_->row_c2r = fftw_plan_dft_c2r_1d(nx, as_fftw(c.data()), r.data(), flags);
  plans_->col_fwd = fftw_plan_many_dft(1, &ny_, 1, as_fftw(c.data()), nullptr, h, 1,
                                       as_fftw(c.data()), nullptr, h, 1, FFTW_FORWARD, flags);
  plans_->col_bwd = fftw_plan_many_dft(1, &ny_, 1, as_fftw(c.data()), nullptr, h, 1,
                                       as_fftw(c.data()), nullptr, h, 1, FFTW_BACKWARD, flags);
  plans_->full_r2c = fftw_plan_dft_r2c_2d(ny, nx, r.data(), as_fftw(c.data()), flags);
  plans_->full_c2r = fftw_plan_dft_c2r_2d(ny, nx, as_fftw(c.data()), r.data(), flags);
}

SpectralGrid::~SpectralGrid() = default;

double SpectralGrid::k1(int ix) const { return kTwoPi * ix / Lx_; }

double SpectralGrid::k2(int jy) const {
  int m = jy <= ny_ / 2 ? jy : jy - ny_;
  return kTwoPi * m / Ly_;
}

bool SpectralGrid::nyquist(int jy, int ix) const { return ix == nx_ / 2 || jy == ny_ / 2; }

void SpectralGrid::forward(const std::vector<double> &in, Spectrum &out) const {
  const int h = nxh();
  out.resize(modes());
  double *src = const_cast<double *>(in.data()); // r2c out of place preserves input
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny_; ++j)
    fftw_execute_dft_r2c(plans_->row_r2c, src + static_cast<std::size_t>(j) * nx_,
                         as_fftw(out.data() + static_cast<std::size_t>(j) * h));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < h; ++i)
    fftw_execute_dft(plans_->col_fwd, as_fftw(out.data() + i), as_fftw(out.data() + i));
}

void SpectralGrid::inverse(const Spectrum &in, std::vector<double> &out) const {
  const int h = nxh();
  Spectrum work(in);
  out.resize(static_cast<std::size_t>(nx_) * ny_);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < h; ++i)
    fftw_execute_dft(plans_->col_bwd, as_fftw(work.data() + i), as_fftw(work.data() + i));
  const double norm = 1.0 / (static_cast<double>(nx_) * ny_);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny_; ++j) {
    double *row = out.data() + static_cast<std::size_t>(j) * nx_;
    fftw_execute_dft_c2r(plans_->row_c2r, as_fftw(work.data() + static_cast<std::size_t>(j) * h),
                         row);
    for (int i = 0; i < nx_; ++i)
      row[i] *= norm;
  }
}

void SpectralGrid::forward_serial(const std::vector<double> &in, Spectrum &out) const {
  out.resize(modes());
  fftw_execute_dft_r2c(plans_->full_r2c, const_cast<double *>(in.data()), as_fftw(out.data()));
}

void SpectralGrid::inverse_serial(const Spectrum &in, std::vector<double> &out) const {
  Spectrum work(in); // c2r destroys its input
  out.resize(static_cast<std::size_t>(nx_) * ny_);
  fftw_execute_dft_c2r(plans_->full_c2r, as_fftw(work.data()), out.data());
  const double norm = 1.0 / (static_cast<double>(nx_) * ny_);
  for (double &v : out)
    v *= norm;
}

namespace {

void check_mean(const BoxField &f) {
  double scale = std::max(1.0, f.max_abs());
  double m = f.mean();
  if (std::abs(m) > 1e-12 * scale) {
    std::ostringstream os;
    os << "field mean " << m << " is not zero; (-Delta)^{-s} needs a zero-mean field";
    throw MeanError(os.str());
  }
}

template <bool Parallel>
BoxField apply_multiplier(const BoxField &field, double s, int sign) {
  if (sign != 1 && sign != -1)
    throw DomainError("frac_laplacian_apply: sign must be +1 or -1");
  if (!(s > 0.0 && s <= 1.0))
    throw DomainError("frac_laplacian_apply: s must lie in (0,1]");
  if (sign < 0)
    check_mean(field);
  SpectralGrid g(field.nx, field.ny, field.Lx, field.Ly);
  Spectrum c;
  if (Parallel)
    g.forward(field.values, c);
  else
    g.forward_serial(field.values, c);
  const int h = g.nxh();
  const double e = sign * s;
#pragma omp parallel for schedule(static) if (Parallel)
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < h; ++i) {
      double k2 = g.k1(i) * g.k1(i) + g.k2(j) * g.k2(j);
      c[static_cast<std::size_t>(j) * h + i] *= k2 > 0.0 ? std::pow(k2, e) : 0.0;
    }
  BoxField out(field.nx, field.ny, field.Lx, field.Ly);
  if (Parallel)
    g.inverse(c, out.values);
  else
    g.inverse_serial(c, out.values);
  return out;
}

} // namespace

BoxField frac_laplacian_apply(const BoxField &field, double s, int sign) {
  return apply_multiplier<true>(field, s, sign);
}

BoxField frac_laplacian_apply_serial(const BoxField &field, double s, int sign) {
  return apply_multiplier<false>(field, s, sign);
}

VelocityField velocity_from_theta(const BoxField &theta, double s) {
  if (!(s > 0.0 && s <= 1.0))
    throw DomainError("velocity_from_theta: s must lie in (0,1]");
  check_mean(theta);
  SpectralGrid g(theta.nx, theta.ny, theta.Lx, theta.Ly);
  Spectrum c, c1, c2;
  g.forward(theta.values, c);
  c1.resize(c.size());
  c2.resize(c.size());
  const int h = g.nxh();
  const std::complex<double> I(0.0, 1.0);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < h; ++i) {
      std::size_t k = static_cast<std::size_t>(j) * h + i;
      double a = g.k1(i), b = g.k2(j), k2 = a * a + b * b;
      std::complex<double> psi = k2 > 0.0 ? c[k] * std::pow(k2, -s) : 0.0;
      if (g.nyquist(j, i))
        psi = 0.0;
      c1[k] = I * b * psi;
      c2[k] = -I * a * psi;
    }
  VelocityField v{BoxField(theta.nx, theta.ny, theta.Lx, theta.Ly),
                  BoxField(theta.nx, theta.ny, theta.Lx, theta.Ly)};
  g.inverse(c1, v.v1.values);
  g.inverse(c2, v.v2.values);
  return v;
}

double spectral_divergence(const VelocityField &v) {
  SpectralGrid g(v.v1.nx, v.v1.ny, v.v1.Lx, v.v1.Ly);
  Spectrum a, b;
  g.forward(v.v1.values, a);
  g.forward(v.v2.values, b);
  const int h = g.nxh();
  const double norm = 1.0 / (static_cast<double>(g.nx()) * g.ny());
  double worst = 0.0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < h; ++i) {
      if (g.nyquist(j, i))
        continue;
      std::size_t k = static_cast<std::size_t>(j) * h + i;
      worst = std::max(worst, std::abs(g.k1(i) * a[k] + g.k2(j) * b[k]) * norm);
    }
  return worst;
}

BoxField shift_x2(const BoxField &field, double tau) {
  SpectralGrid g(field.nx, field.ny, field.Lx, field.Ly);
  Spectrum c;
  g.forward(field.values, c);
  const int h = g.nxh();
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny(); ++j) {
    double ph = g.k2(j) * tau;
    // Nyquist row: keep the real part so the field stays real
    std::complex<double> f = j == g.ny() / 2 ? std::complex<double>(std::cos(ph), 0.0)
                                             : std::polar(1.0, -ph);
    for (int i = 0; i < h; ++i)
      c[static_cast<std::size_t>(j) * h + i] *= f;
  }
  BoxField out(field.nx, field.ny, field.Lx, field.Ly);
  g.inverse(c, out.values);
  return out;
}

} // namespace karman
