#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "karman/kernels.hpp"

namespace karman {

struct Vortex {
  Vec2 position;
  double strength = 1.0;
};

/// Vortices in the typical period R x [-l/2, l/2), replicated with period l.
struct VortexConfiguration {
  std::vector<Vortex> vortices;
  double l = 1.0;
};

struct StreetGeometry {
  double d = 1.0;
  double l = 1.0;
  double a = 0.0; // 0 or l/4
  double s = 1.0;
};

enum class Branch { unique, inner, outer };

/// Admissible speed interval for (l, a, s); hi may be +inf.
struct SpeedRange {
  double lo = 0.0;
  double hi = 0.0;
  bool hi_attained = false;
};

void validate_geometry(const StreetGeometry &geom);
bool is_staggered(double a, double l);

/// W1 (a=0) or W2 (a=l/4) for unit strengths at (-d,-a), (d,a).
LatticeSum street_speed(const StreetGeometry &geom, const LatticeSumPolicy &policy);

SpeedRange street_speed_range(double l, double a, double s, const LatticeSumPolicy &policy);

/// Brackets [lo,hi] in d containing a root of street_speed(d) - W.
std::vector<std::pair<double, double>> street_distance_brackets(double W, double l, double a,
                                                               double s,
                                                               const LatticeSumPolicy &policy);

std::vector<double> street_distance_roots(double W, double l, double a, double s,
                                          const LatticeSumPolicy &policy);

double solve_street_distance(double W, double l, double a, double s,
                             const LatticeSumPolicy &policy, Branch branch = Branch::unique);

/// Strengths +1 at (-d,-a) and -1 at (d,a).
VortexConfiguration make_street(double d, double l, double a);

void validate_configuration(const VortexConfiguration &config);

std::vector<Vec2> induced_velocities(const VortexConfiguration &config, double s,
                                     const LatticeSumPolicy &policy);
std::vector<Vec2> induced_velocities_serial(const VortexConfiguration &config, double s,
                                            const LatticeSumPolicy &policy);

/// Wraps x2 into [-l/2, l/2).
double wrap_period(double x2, double l);

struct EvolveOptions {
  long stride = 1;
  double collision_floor = 1e-8;
};

struct Trajectory {
  double l = 1.0;
  std::vector<double> times;
  std::vector<std::vector<Vortex>> frames;
};

Trajectory evolve_point_vortices(const VortexConfiguration &config, double s, double dt,
                                 double T, const LatticeSumPolicy &policy,
                                 const EvolveOptions &options = {});

void write_trajectory_csv(const Trajectory &traj, std::ostream &out);

} // namespace karman
