#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "karman/kernels.hpp"
#include "karman/plasma.hpp"
#include "karman/pointvortex.hpp"

namespace karman {

struct StreetConfig {
  double s = 1.0;
  double l = 1.0;
  double a = 0.0; // 0 or l/4
  double eps = 0.05;
  double sigma = 0.05;
  double gamma1 = 2.0;
  double gamma2 = 2.0;
  std::optional<double> W;     // target speed
  std::optional<double> d;     // half-distance
  std::optional<double> r_cut; // default min(d, l/4)/2
  Branch branch = Branch::unique;
  LatticeSumPolicy trunc;
  bool allow_degenerate = false; // gamma = 1/(1-s): mu = 1, circulation M_gamma
  FractionalGridSpec plasma_grid;
  double plasma_tolerance = 1e-12;
};

/// gamma = 1/(1-s), where the scale equation has no solution.
bool is_degenerate(double s, double gamma);

/// Checks the single-configuration invariants (exponents, stagger, scales).
void validate_street_config(const StreetConfig &config);

struct ResolvedGeometry {
  double d = 0.0;
  double W = 0.0;        // speed used in the nonlinearity
  double W_street = 0.0; // point-vortex speed at d, times the circulation
  Vec2 p, q;
  double r_cut = 0.0;
};

/// Point-vortex geometry for rows of the given circulation (speeds scale linearly).
ResolvedGeometry resolve_geometry(const StreetConfig &config, double circulation = 1.0);

/// One signed patch: the radial profile and everything derived from it.
struct Patch {
  RadialProfile profile;
  SignScale scale;
  double scale_eps = 0.0;    // eps or sigma
  double gamma = 2.0;
  double length = 0.0;       // eps mu (s<1) or s_pm (s=1)
  double amplitude = 0.0;    // eps^{2s-2} mu^{-2s/(gamma-1)} (s<1)
  double level = 0.0;        // profile level at the core boundary, stream units
  double eta = 1.0;          // eps^{2-2s}
  double source_factor = 0.0; // eps^{-2} eta^gamma
  double circulation = 1.0;
  double core_radius = 0.0;  // physical
  double support_radius = 0.0; // beyond it the profile equals circulation * G_s
  Vec2 center;
  int sign = 1;
};

struct StreetProfiles {
  StreetConfig config;
  SQGParams params;
  ResolvedGeometry geom;
  Patch plus, minus;
  double lambda_plus = 0.0, lambda_minus = 0.0;
  // levels Psi + W x1 (plus) and -Psi - W x1 (minus) where the sources switch on
  double threshold_plus = 0.0, threshold_minus = 0.0;
  int lambda_iterations = 0;
};

struct RadialPair {
  RadialProfile plus, minus;
};

/// Plasma ground states for both signs.
RadialPair solve_street_radials(const StreetConfig &config);

/// Circulation of each row: M_gamma in the degenerate unit-mu variant, else 1.
double street_circulation(const StreetConfig &config, const RadialPair &radials);

/// Scales, geometry and offsets on top of precomputed radial profiles.
StreetProfiles build_street(const StreetConfig &config, const RadialPair &radials);

/// Convenience: solve_street_radials followed by build_street.
StreetProfiles make_street_profiles(const StreetConfig &config);

struct Lambdas {
  double plus = 0.0, minus = 0.0;
  double threshold_plus = 0.0, threshold_minus = 0.0;
  int iterations = 0;
};

/// Offsets lambda_pm; profiles must carry resolved geometry and scales.
Lambdas compute_lambdas(const StreetProfiles &profiles);

/// Single-patch profile contribution P(y) in stream units and its radial derivative.
double patch_value(const Patch &patch, double r);
double patch_radial_derivative(const Patch &patch, double r);

double assemble_stream(const StreetProfiles &st, Vec2 x);
double assemble_vorticity(const StreetProfiles &st, Vec2 x);
double kernel_mode_Z(const StreetProfiles &st, Vec2 x);
double linearized_potential(const StreetProfiles &st, Vec2 x);

/// Regular parts B_+(x) = Psi - P_+(x-p) + W x1 and B_-(x) = -Psi - P_-(x-q) - W x1.
double regular_part_plus(const StreetProfiles &st, Vec2 x);
double regular_part_minus(const StreetProfiles &st, Vec2 x);

/// E = (-Delta)^s_* Psi - f(x, Psi), via the positive-part identity on the patches.
double residual_at(const StreetProfiles &st, Vec2 x);

struct FieldSamples {
  std::vector<Vec2> points;
  std::vector<double> values;
  std::vector<double> weights; // quadrature cell areas
};

struct WeightedNorms {
  double star = 0.0;
  double starstar = 0.0;
  double rho_floor = 0.0;
};

double rho_weight(const StreetProfiles &st, Vec2 x);
WeightedNorms weighted_norms(const FieldSamples &samples, const StreetProfiles &st);

struct PatchGridSpec {
  int cells = 64;       // cells across the core diameter
  double extent = 2.0;  // half-width in core radii, clipped to r_cut
};

/// Midpoint cells covering both patches.
FieldSamples patch_grid(const StreetProfiles &st, const PatchGridSpec &spec);

struct ResidualReport {
  FieldSamples field;
  WeightedNorms norms;
  double L_plus = 0.0, L_minus = 0.0; // support radii of theta over eps and sigma
};

ResidualReport residual_field(const StreetProfiles &st, const PatchGridSpec &spec = {});

struct ReductionValue {
  double value = 0.0;
  double coarse = 0.0; // same quadrature at half resolution
  double richardson = 0.0;
};

ReductionValue reduction_functional(const StreetProfiles &st, const PatchGridSpec &spec = {});

struct ReductionRoot {
  double d = 0.0;
  double d_speed = 0.0; // solve_street_distance(W)
  std::vector<std::pair<double, double>> scan; // (d, functional)
};

/// Root in d of the reduction functional at fixed W, scanned over [d_lo, d_hi].
ReductionRoot reduction_root(const StreetConfig &config, const RadialPair &radials,
                             double d_lo, double d_hi, int scan_points = 16,
                             const PatchGridSpec &spec = {});

/// Measured support radii of theta, in units of eps (plus) and sigma (minus).
std::pair<double, double> support_radii(const StreetProfiles &st, const PatchGridSpec &spec = {});

/// theta_0 and Psi on the box [-Lx/2, Lx/2) x [-l/2, l/2), row-major in x2.
std::vector<double> sample_vorticity(const StreetProfiles &st, int nx, int ny, double Lx);
std::vector<double> sample_vorticity_serial(const StreetProfiles &st, int nx, int ny, double Lx);
std::vector<double> sample_stream(const StreetProfiles &st, int nx, int ny, double Lx);
std::vector<double> sample_stream_serial(const StreetProfiles &st, int nx, int ny, double Lx);

void write_snapshot_csv(const StreetProfiles &st, int nx, int ny, double Lx, std::ostream &out);
std::string street_metadata_json(const StreetProfiles &st, const WeightedNorms *norms = nullptr);

} // namespace karman
