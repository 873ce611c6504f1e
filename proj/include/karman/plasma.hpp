#pragma once

#include <iosfwd>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace karman {

enum class ProfileKind { fractional, dirichlet };

/// Radial ground state sampled on an increasing grid, with a C^1 cubic
/// Hermite interpolant. Fractional profiles switch to the exterior expansion
/// c_s M r^{2s-2} (1 + b r^{-2}) beyond a matching radius; Dirichlet profiles
/// vanish for r > 1.
class RadialProfile {
public:
  RadialProfile() = default;
  RadialProfile(ProfileKind kind, double s, double gamma, std::vector<double> radii,
                std::vector<double> values, std::vector<double> derivatives);

  ProfileKind kind = ProfileKind::fractional;
  double s = 1.0;
  double gamma = 2.0;
  double mass = 0.0;                // M_gamma
  double core_radius = 1.0;         // U = 1 (fractional) or V = 0 (Dirichlet)
  double far_coefficient = 0.0;     // c_s M_gamma (fractional)
  double boundary_derivative = 0.0; // V'(1) (Dirichlet)
  int iterations = 0;
  double last_change = 0.0;

  const std::vector<double> &radii() const { return radii_; }
  const std::vector<double> &values() const { return values_; }
  const std::vector<double> &derivatives() const { return derivs_; }

  double value(double r) const;
  double derivative(double r) const;
  double max_radius() const { return radii_.empty() ? 0.0 : radii_.back(); }

  /// Sets far_coefficient and matches b to the table at match_radius (fractional only).
  void attach_far_field(double coefficient, double match_radius);
  double far_correction() const { return far_b_; }
  double far_match_radius() const { return far_start_; }

private:
  struct Interp;
  std::vector<double> radii_, values_, derivs_;
  std::shared_ptr<const Interp> interp_;
  double far_b_ = 0.0;
  double far_start_ = INFINITY;
};

struct FractionalGridSpec {
  int core_nodes = 256;       // uniform cells across the unit core
  double far_radius = 1e4;    // outer radius in core radii
  double growth = 1.1;        // exterior spacing growth factor
  double max_log_step = 0.05; // exterior spacing cap relative to radius
  double threshold = 0.5;     // level t of the normalized iteration
  double damping = 0.5;
  int max_iterations = 5000;
};

/// Ground state of (-Delta)^s u = (u-1)_+^gamma in the plane, 0 < s < 1.
RadialProfile solve_plasma_fractional(double s, double gamma, const FractionalGridSpec &grid = {},
                                      double tolerance = 1e-12);

/// Radial solution of -Delta V = V^gamma in B_1, V = 0 on the boundary.
RadialProfile solve_plasma_dirichlet(double gamma, double tolerance = 1e-12,
                                     int output_cells = 4000);

/// Admissible range check for the fractional exponent.
void validate_fractional_gamma(double s, double gamma);

struct SignScale {
  double mu = 1.0;
  double patch_radius = 0.0; // s_+ = mu eps (s = 1)
  double lambda = 0.0;       // lambda the scale was matched against (s = 1)
  bool degenerate = false;   // gamma = 1/(1-s): mu fixed to 1, circulation M_gamma
};

struct ScaleConstants {
  SignScale plus, minus;
};

/// mu with M mu^{2 - 2 s gamma/(gamma-1)} = 1.
SignScale fractional_scales(const RadialProfile &profile);

/// Degenerate-exponent fallback: mu = 1, circulation M_gamma.
SignScale fractional_scales_degenerate(const RadialProfile &profile);

/// Root of mu^{-2/(gamma-1)} |V'(1)| = (lambda/2pi) |ln eps| / |ln(mu eps)|.
SignScale matching_scales_s1(const RadialProfile &profile, double lambda, double eps);

/// Ring kernel c_s int_0^{2pi} |r e - rho e(phi)|^{2s-2} dphi.
double ring_kernel(double s, double r, double rho);

/// First-derivative weights at x0 from arbitrary nodes (Fornberg).
std::vector<double> derivative_weights(double x0, const std::vector<double> &nodes);

void write_profile_csv(const RadialProfile &p, std::ostream &out);
std::string profile_sidecar_json(const RadialProfile &p, double mu);

} // namespace karman
