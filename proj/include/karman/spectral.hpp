#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "karman/vec2.hpp"

namespace karman {

/// Samples on [-Lx/2, Lx/2) x [-Ly/2, Ly/2), values[j*nx + i] at
/// (-Lx/2 + i Lx/nx, -Ly/2 + j Ly/ny). Ly is the street period l.
struct BoxField {
  int nx = 0, ny = 0;
  double Lx = 1.0, Ly = 1.0;
  std::vector<double> values;

  BoxField() = default;
  BoxField(int nx, int ny, double Lx, double Ly);

  double hx() const { return Lx / nx; }
  double hy() const { return Ly / ny; }
  Vec2 point(int i, int j) const { return {-Lx / 2 + i * hx(), -Ly / 2 + j * hy()}; }
  double &at(int i, int j) { return values[static_cast<std::size_t>(j) * nx + i]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }
  double integral() const;
  double mean() const;
  double max_abs() const;
};

/// Checks sizes (powers of two, >= 8) and extents.
void validate_box(int nx, int ny, double Lx, double Ly);

using Spectrum = std::vector<std::complex<double>>;

/// Real-to-complex transforms on an nx x ny box; spectrum is ny x (nx/2+1),
/// row-major in the x2 wavenumber. Parallel transforms run 1D row and column
/// plans under OpenMP; the serial twins use a single 2D plan.
class SpectralGrid {
public:
  SpectralGrid(int nx, int ny, double Lx, double Ly);
  ~SpectralGrid();
  SpectralGrid(const SpectralGrid &) = delete;
  SpectralGrid &operator=(const SpectralGrid &) = delete;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nxh() const { return nx_ / 2 + 1; }
  double Lx() const { return Lx_; }
  double Ly() const { return Ly_; }
  std::size_t modes() const { return static_cast<std::size_t>(ny_) * nxh(); }

  /// Wavenumbers of spectrum index (jy, ix).
  double k1(int ix) const;
  double k2(int jy) const;
  bool nyquist(int jy, int ix) const;

  void forward(const std::vector<double> &in, Spectrum &out) const;
  void inverse(const Spectrum &in, std::vector<double> &out) const; // normalized
  void forward_serial(const std::vector<double> &in, Spectrum &out) const;
  void inverse_serial(const Spectrum &in, std::vector<double> &out) const;

private:
  struct Plans;
  int nx_, ny_;
  double Lx_, Ly_;
  std::unique_ptr<Plans> plans_;
};

/// |k|^{2s sign} applied mode-wise, zero mode mapped to zero. sign = -1
/// requires zero mean (MeanError beyond 1e-12 of max|field|).
BoxField frac_laplacian_apply(const BoxField &field, double s, int sign);
BoxField frac_laplacian_apply_serial(const BoxField &field, double s, int sign);

struct VelocityField {
  BoxField v1, v2;
};

/// v = perp grad (-Delta)^{-s} theta; requires zero mean.
VelocityField velocity_from_theta(const BoxField &theta, double s);

/// Spectral divergence of a velocity field, sup over modes of |k . v_hat|.
double spectral_divergence(const VelocityField &v);

struct SolverOptions {
  double dealias = 2.0 / 3.0; // fraction of the Nyquist index kept
  double filter = 0.0;        // strength of an exp(-filter (|k|/k_max)^16) filter; 0 = off
  double cfl = 0.5;
  bool parallel = true;
  // s = 1 only: add the uniform x2-velocity that zeroes the row-averaged v2 at
  // the box edge x1 = +-Lx/2. A log-kernel street carries a net flux between
  // its rows, which a periodic box otherwise returns as a uniform back-flow.
  bool strip_frame = true;
};

/// RK4 pseudo-spectral evolver for theta_t + v . grad theta = 0 on the box.
/// The mean of theta does not induce velocity and is carried unchanged.
class GsqgSolver {
public:
  GsqgSolver(const BoxField &theta0, double s, const SolverOptions &options = {});
  ~GsqgSolver();

  /// One RK4 step; CflError (with a suggested dt) when max|v| dt / h > cfl.
  void step(double dt);
  double time() const { return t_; }
  BoxField theta() const;
  const Spectrum &spectrum() const { return theta_hat_; }
  VelocityField velocity() const;
  double max_speed() const;
  /// Uniform x2-velocity added by the strip-frame correction (0 when off or s < 1).
  double frame_velocity() const;

  double casimir1() const; // integral of theta
  double casimir2() const; // integral of theta^2
  double hamiltonian() const; // integral of theta (-Delta)^{-s} theta

  const SpectralGrid &grid() const { return *grid_; }
  double s() const { return s_; }

private:
  void rhs(const Spectrum &th, Spectrum &out, double *vmax) const;
  double frame_from(const Spectrum &th) const;
  std::unique_ptr<SpectralGrid> grid_;
  double s_;
  SolverOptions opt_;
  double Lx_, Ly_;
  double t_ = 0.0;
  Spectrum theta_hat_;
  std::vector<double> mask_;    // dealias mask times filter
  std::vector<double> inv_lap_; // |k|^{-2s}, 0 at k = 0
};

/// One RK4 step of a field.
BoxField step_rk4(const BoxField &theta, double s, double dt, const SolverOptions &options = {});

/// theta(x - tau e2) by a spectral phase shift.
BoxField shift_x2(const BoxField &field, double tau);

struct TravellingSample {
  double t = 0.0;
  double centroid_x1 = 0.0, centroid_x2 = 0.0; // positive part over x1 < 0, x2 unwrapped
  double W_inst = 0.0;
  double shape_error = 0.0; // shift-minimized relative L2 defect
  double shift = 0.0;       // minimizing tau
  double casimir1 = 0.0, casimir2 = 0.0, hamiltonian = 0.0;
};

struct TravellingOptions {
  double T = 0.2;
  double dt = 1e-3;
  int sample_every = 10;
  SolverOptions solver;
  std::function<void(long step, const BoxField &theta)> observer; // called at every sample
};

struct TravellingReport {
  std::vector<TravellingSample> samples;
  double W_expected = 0.0;
  double W_measured = 0.0; // least-squares slope of centroid_x2(t)
  double x1_drift = 0.0;   // max |centroid_x1(t) - centroid_x1(0)|
  double shape_error = 0.0;
  double casimir1_drift = 0.0; // |C1(T) - C1(0)|
  double casimir2_drift = 0.0; // relative
  double hamiltonian_drift = 0.0; // relative
  bool unstable = false;
  std::string message;
  int steps = 0;
};

/// Evolves theta0 and compares its drift with W. A blow-up of max|theta|
/// beyond 10x the initial value stops the run with unstable = true.
TravellingReport run_travelling_test(const BoxField &theta0, double s, double W,
                                     const TravellingOptions &options);

/// Positive-part centroid over x1 < 0 as (x1, circular mean of x2).
Vec2 positive_centroid(const BoxField &theta);

void write_travelling_csv(const TravellingReport &report, std::ostream &out);

} // namespace karman
