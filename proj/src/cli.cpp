#include "karman/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "karman/errors.hpp"
#include "karman/io.hpp"
#include "karman/kernels.hpp"
#include "karman/parallel.hpp"
#include "karman/plasma.hpp"
#include "karman/pointvortex.hpp"
#include "karman/spectral.hpp"
#include "karman/street.hpp"

namespace karman {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Context {
  fs::path dir;
  bool verbose = false;
  std::ostream *log = nullptr;
  std::vector<std::string> artifacts;
  ojson tolerances = ojson::object(); // values chosen at run time

  void note(const std::string &msg) const {
    if (verbose && log)
      *log << "[karman] " << msg << '\n';
  }
  void write(const std::string &name, const std::string &bytes) {
    write_file(dir / name, bytes);
    artifacts.push_back(name);
    note("wrote " + name);
  }
};

std::string csv_row(std::initializer_list<double> xs) {
  std::string r;
  for (double x : xs)
    r += (r.empty() ? "" : ",") + format_number(x);
  return r + '\n';
}

LatticeSumPolicy trunc_from(const ojson &j) {
  LatticeSumPolicy p;
  p.truncation_K = j.at("truncation_K").get<long>();
  p.tail = parse_tail_mode(j.at("tail").get<std::string>());
  p.tolerance = j.at("tolerance").get<double>();
  p.max_K = j.at("max_K").get<long>();
  return p;
}

Branch branch_from(const ojson &j) {
  std::string b = j.get<std::string>();
  return b == "inner" ? Branch::inner : b == "outer" ? Branch::outer : Branch::unique;
}

std::optional<double> opt(const ojson &j, const char *key) {
  if (!j.contains(key) || j.at(key).is_null())
    return std::nullopt;
  return j.at(key).get<double>();
}

StreetConfig street_from(const ojson &p) {
  StreetConfig c;
  c.s = p.at("s").get<double>();
  c.l = p.at("l").get<double>();
  c.a = p.at("a").get<double>();
  c.eps = p.at("eps").get<double>();
  c.sigma = p.at("sigma").get<double>();
  c.gamma1 = p.at("gamma1").get<double>();
  c.gamma2 = p.at("gamma2").get<double>();
  c.allow_degenerate = p.at("allow_degenerate").get<bool>();
  c.W = opt(p, "W");
  c.d = opt(p, "d");
  c.r_cut = opt(p, "r_cut");
  c.branch = branch_from(p.at("branch"));
  c.trunc = trunc_from(p.at("trunc"));
  const ojson &g = p.at("plasma");
  c.plasma_grid.core_nodes = g.at("core_nodes").get<int>();
  c.plasma_grid.far_radius = g.at("far_radius").get<double>();
  c.plasma_grid.growth = g.at("growth").get<double>();
  c.plasma_grid.max_log_step = g.at("max_log_step").get<double>();
  c.plasma_grid.threshold = g.at("threshold").get<double>();
  c.plasma_grid.damping = g.at("damping").get<double>();
  c.plasma_grid.max_iterations = g.at("max_iterations").get<int>();
  c.plasma_tolerance = g.at("tolerance").get<double>();
  return c;
}

PatchGridSpec patch_from(const ojson &j) {
  PatchGridSpec s;
  s.cells = j.at("cells").get<int>();
  s.extent = j.at("extent").get<double>();
  return s;
}

double fit_loglog(const std::vector<double> &x, const std::vector<double> &y) {
  double n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------- speeds

void run_speeds(const ojson &p, Context &ctx) {
  const auto policy = trunc_from(p.at("trunc"));
  std::ostringstream os;
  os << "s,l,d,a,W,error_bound,K,closed_form,abs_diff\n";
  for (double s : p.at("s").get<std::vector<double>>())
    for (double l : p.at("l").get<std::vector<double>>())
      for (double d : p.at("d").get<std::vector<double>>())
        for (const auto &st : p.at("stagger")) {
          double a = st.get<std::string>() == "l/4" ? 0.25 * l : 0.0;
          LatticeSum w = street_speed({d, l, a, s}, policy);
          double closed = NAN;
          if (s >= 1.0 - kUnitExponentSnap) {
            double x = 2.0 * std::numbers::pi * d / l;
            closed = a == 0.0 ? 0.5 / (l * std::tanh(x)) : 0.5 * std::tanh(x) / l;
          }
          os << format_number(s) << ',' << format_number(l) << ',' << format_number(d) << ','
             << format_number(a) << ',' << format_number(w.value) << ','
             << format_number(w.error) << ',' << w.K << ',' << format_number(closed) << ','
             << format_number(std::isnan(closed) ? NAN : std::abs(w.value - closed)) << '\n';
        }
  ctx.write("speeds.csv", os.str());
}

// ---------------------------------------------------------------- solve-d

void run_solve_d(const ojson &p, Context &ctx) {
  const auto policy = trunc_from(p.at("trunc"));
  const double s = p.at("s").get<double>(), l = p.at("l").get<double>(),
               a = p.at("a").get<double>();
  const Branch br = branch_from(p.at("branch"));
  SpeedRange range = street_speed_range(l, a, s, policy);
  std::ostringstream os;
  os << "W,d,W_check,abs_residual\n";
  for (double W : p.at("W").get<std::vector<double>>()) {
    double d = solve_street_distance(W, l, a, s, policy, br);
    double back = street_speed({d, l, a, s}, policy).value;
    os << csv_row({W, d, back, std::abs(back - W)});
  }
  ctx.write("distances.csv", os.str());
  ojson r;
  r["W_min"] = range.lo;
  r["W_max"] = std::isfinite(range.hi) ? ojson(range.hi) : ojson("inf");
  r["W_max_attained"] = range.hi_attained;
  ctx.write("range.json", r.dump(2) + "\n");
}

// ---------------------------------------------------------------- pointvortex

void run_pointvortex(const ojson &p, Context &ctx) {
  const auto policy = trunc_from(p.at("trunc"));
  const double s = p.at("s").get<double>(), l = p.at("l").get<double>(),
               a = p.at("a").get<double>();
  double d = 0.0;
  if (auto dd = opt(p, "d"))
    d = *dd;
  else
    d = solve_street_distance(*opt(p, "W"), l, a, s, policy, branch_from(p.at("branch")));
  const double W = street_speed({d, l, a, s}, policy).value;
  VortexConfiguration cfg = make_street(d, l, a);
  const auto &pert = p.at("perturbation");
  bool perturbed = false;
  for (int i = 0; i < 2; ++i) {
    double dx = pert[i][0].get<double>(), dy = pert[i][1].get<double>();
    perturbed = perturbed || dx != 0.0 || dy != 0.0;
    cfg.vortices[i].position = cfg.vortices[i].position + Vec2{dx, dy};
    cfg.vortices[i].position.x2 = wrap_period(cfg.vortices[i].position.x2, l);
  }
  EvolveOptions eo;
  eo.stride = p.at("stride").get<long>();
  eo.collision_floor = p.at("collision_floor").get<double>();
  const double dt = p.at("dt").get<double>(), T = p.at("T").get<double>();
  ctx.note("integrating point vortices to T=" + format_number(T));
  Trajectory traj = evolve_point_vortices(cfg, s, dt, T, policy, eo);
  std::ostringstream os;
  write_trajectory_csv(traj, os);
  ctx.write("trajectory.csv", os.str());

  ojson r;
  r["d"] = d;
  r["W"] = W;
  r["perturbed"] = perturbed;
  double dev = 0.0;
  for (std::size_t f = 0; f < traj.frames.size(); ++f)
    for (std::size_t i = 0; i < traj.frames[f].size(); ++i) {
      Vec2 x = traj.frames[f][i].position, x0 = cfg.vortices[i].position;
      double dx2 = x.x2 - (x0.x2 + W * traj.times[f]);
      dx2 -= l * std::round(dx2 / l);
      dev = std::max(dev, std::hypot(x.x1 - x0.x1, dx2));
    }
  r["max_deviation_from_rigid_translation"] = dev;
  r["frames"] = traj.frames.size();
  ctx.write("summary.json", r.dump(2) + "\n");
}

// ---------------------------------------------------------------- plasma

void run_plasma(const ojson &p, Context &ctx) {
  const double s = p.at("s").get<double>(), g = p.at("gamma").get<double>();
  const ojson &pg = p.at("plasma");
  RadialProfile prof;
  double mu = NAN;
  if (s >= 1.0 - kUnitExponentSnap) {
    ctx.note("shooting the Dirichlet profile");
    prof = solve_plasma_dirichlet(g, pg.at("tolerance").get<double>(),
                                  static_cast<int>(p.at("output_cells").get<long>()));
  } else {
    FractionalGridSpec grid;
    grid.core_nodes = pg.at("core_nodes").get<int>();
    grid.far_radius = pg.at("far_radius").get<double>();
    grid.growth = pg.at("growth").get<double>();
    grid.max_log_step = pg.at("max_log_step").get<double>();
    grid.threshold = pg.at("threshold").get<double>();
    grid.damping = pg.at("damping").get<double>();
    grid.max_iterations = pg.at("max_iterations").get<int>();
    ctx.note("iterating the fractional profile");
    prof = solve_plasma_fractional(s, g, grid, pg.at("tolerance").get<double>());
    mu = is_degenerate(s, g) ? fractional_scales_degenerate(prof).mu : fractional_scales(prof).mu;
  }
  std::ostringstream os;
  write_profile_csv(prof, os);
  ctx.write("profile.csv", os.str());
  ctx.write("profile.json", profile_sidecar_json(prof, mu) + "\n");
}

// ---------------------------------------------------------------- assemble

double default_Lx(const StreetProfiles &st) { return 8.0 * std::max(st.geom.d, st.config.l); }

void run_assemble(const ojson &p, Context &ctx) {
  StreetConfig c = street_from(p);
  ctx.note("solving the plasma profiles");
  StreetProfiles st = make_street_profiles(c);
  const ojson &g = p.at("grid");
  const int nx = g.at("nx").get<int>(), ny = g.at("ny").get<int>();
  const double Lx = opt(g, "Lx").value_or(default_Lx(st));
  ctx.tolerances["grid_Lx"] = Lx;
  std::ostringstream os;
  write_snapshot_csv(st, nx, ny, Lx, os);
  ctx.write("snapshot.csv", os.str());
  std::optional<WeightedNorms> norms;
  if (p.at("norms").get<bool>()) {
    ctx.note("evaluating the residual norms");
    norms = residual_field(st, patch_from(p.at("patch"))).norms;
  }
  ojson meta = ojson::parse(street_metadata_json(st, norms ? &*norms : nullptr));
  meta["grid"] = {{"nx", nx}, {"ny", ny}, {"Lx", Lx}};
  ctx.write("street.json", meta.dump(2) + "\n");
}

// ---------------------------------------------------------------- residual-scaling

std::vector<double> family_values(const ojson &fam, const std::vector<double> &eps) {
  std::string type = fam.at("type").get<std::string>();
  if (type == "equal")
    return eps;
  if (type == "power") {
    std::vector<double> s;
    for (double e : eps)
      s.push_back(std::pow(e, fam.at("beta").get<double>()));
    return s;
  }
  return fam.at("values").get<std::vector<double>>();
}

void run_residual_scaling(const ojson &p, Context &ctx) {
  StreetConfig base = street_from(p);
  const auto eps = p.at("eps_list").get<std::vector<double>>();
  const auto sigma = family_values(p.at("sigma_family"), eps);
  const PatchGridSpec patch = patch_from(p.at("patch"));
  ctx.note("solving the plasma profiles");
  RadialPair radials = solve_street_radials(base);
  std::optional<double> W = base.W;
  std::ostringstream os;
  os << "eps,sigma,W,norm_starstar,norm_star,rho_floor,L_plus,L_minus\n";
  std::vector<double> nss;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    StreetConfig c = base;
    c.eps = eps[k];
    c.sigma = sigma[k];
    if (!W) {
      StreetConfig probe = c;
      probe.W.reset();
      W = p.at("speed_factor").get<double>() * build_street(probe, radials).geom.W_street;
    }
    c.W = W;
    ctx.note("eps=" + format_number(eps[k]));
    StreetProfiles st = build_street(c, radials);
    ResidualReport rep = residual_field(st, patch);
    nss.push_back(rep.norms.starstar);
    os << csv_row({eps[k], sigma[k], *W, rep.norms.starstar, rep.norms.star, rep.norms.rho_floor,
                   rep.L_plus, rep.L_minus});
  }
  ctx.write("residuals.csv", os.str());
  ojson r;
  const double slope = eps.size() > 1 ? fit_loglog(eps, nss) : NAN;
  const double expected = 3.0 - 2.0 * (base.s >= 1.0 - kUnitExponentSnap ? 1.0 : base.s);
  r["W"] = *W;
  r["slope"] = slope;
  r["expected_slope"] = expected;
  r["within_0.3"] = std::abs(slope - expected) <= 0.3;
  double C = 0.0;
  for (std::size_t k = 0; k < eps.size(); ++k)
    C = std::max(C, sigma[k] / eps[k]);
  r["sigma_over_eps_bound"] = C;
  ctx.write("slope.json", r.dump(2) + "\n");
}

// ---------------------------------------------------------------- reduction-root

void run_reduction_root(const ojson &p, Context &ctx) {
  StreetConfig c = street_from(p);
  ctx.note("solving the plasma profiles");
  RadialPair radials = solve_street_radials(c);
  double lo, hi;
  if (p.at("d_range").is_null()) {
    StreetConfig probe = c;
    probe.d.reset();
    double d0 = resolve_geometry(probe, street_circulation(probe, radials)).d;
    lo = 0.5 * d0;
    hi = 2.0 * d0;
  } else {
    auto r = p.at("d_range").get<std::vector<double>>();
    lo = r[0];
    hi = r[1];
  }
  ctx.tolerances["d_range"] = {lo, hi};
  ctx.note("scanning the reduction functional");
  ReductionRoot root = reduction_root(c, radials, lo, hi, p.at("scan_points").get<int>(),
                                      patch_from(p.at("patch")));
  std::ostringstream os;
  os << "d,functional\n";
  for (auto [d, f] : root.scan)
    os << csv_row({d, f});
  ctx.write("scan.csv", os.str());
  ojson r;
  r["d_root"] = root.d;
  r["d_speed"] = root.d_speed;
  r["relative_difference"] = (root.d - root.d_speed) / root.d_speed;
  ctx.write("root.json", r.dump(2) + "\n");
}

// ---------------------------------------------------------------- evolve

struct Snapshot {
  BoxField theta;
  double s = 1.0, W = 0.0, d = 0.0;
};

Snapshot load_snapshot(const ojson &snap) {
  ojson meta = ojson::parse(read_file(snap.at("metadata").get<std::string>()));
  Snapshot out;
  out.s = meta.at("s").get<double>();
  out.W = meta.at("W").get<double>();
  out.d = meta.at("d").get<double>();
  const double l = meta.at("l").get<double>();
  std::istringstream in(read_file(snap.at("csv").get<std::string>()));
  std::string line;
  std::getline(in, line);
  if (line.rfind("x1,x2,theta", 0) != 0)
    throw DomainError("snapshot CSV must start with the header x1,x2,theta,psi");
  std::vector<double> x1, x2, th;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::istringstream row(line);
    std::string a, b, c;
    std::getline(row, a, ',');
    std::getline(row, b, ',');
    std::getline(row, c, ',');
    x1.push_back(std::stod(a));
    x2.push_back(std::stod(b));
    th.push_back(std::stod(c));
  }
  int nx = 0;
  while (nx < static_cast<int>(x2.size()) && x2[nx] == x2[0])
    ++nx;
  if (nx == 0 || th.size() % nx != 0)
    throw DomainError("snapshot CSV is not a full row-major grid");
  const int ny = static_cast<int>(th.size() / nx);
  const double Lx = -2.0 * x1[0];
  validate_box(nx, ny, Lx, l);
  out.theta = BoxField(nx, ny, Lx, l);
  out.theta.values = th;
  return out;
}

// zero padding to twice the width; theta vanishes away from the street
BoxField widen(const BoxField &f) {
  BoxField g(2 * f.nx, f.ny, 2.0 * f.Lx, f.Ly);
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i)
      g.at(i + f.nx / 2, j) = f.at(i, j);
  return g;
}

void run_evolve(const ojson &p, Context &ctx) {
  Snapshot snap;
  if (p.contains("snapshot")) {
    snap = load_snapshot(p.at("snapshot"));
  } else {
    StreetConfig c = street_from(p);
    ctx.note("assembling the street");
    StreetProfiles st = make_street_profiles(c);
    const ojson &b = p.at("box");
    const int nx = b.at("nx").get<int>(), ny = b.at("ny").get<int>();
    const double Lx = opt(b, "Lx").value_or(default_Lx(st));
    ctx.tolerances["box_Lx"] = Lx;
    snap.theta = BoxField(nx, ny, Lx, c.l);
    snap.theta.values = sample_vorticity(st, nx, ny, Lx);
    snap.s = c.s;
    snap.W = st.geom.W;
    snap.d = st.geom.d;
  }
  const BoxField &th = snap.theta;
  if (th.Lx < 8.0 * std::max(snap.d, th.Ly) * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "box width Lx=" << th.Lx << " is below 8 max(d, l)=" << 8.0 * std::max(snap.d, th.Ly);
    throw DomainError(os.str());
  }
  TravellingOptions o;
  o.T = p.at("T").get<double>();
  o.sample_every = static_cast<int>(p.at("sample_every").get<long>());
  o.solver.cfl = p.at("cfl").get<double>();
  o.solver.dealias = p.at("dealias").get<double>();
  o.solver.filter = p.at("filter").get<double>();
  o.solver.strip_frame = p.at("strip_frame").get<bool>();
  if (auto dt = opt(p, "dt")) {
    o.dt = *dt;
  } else {
    GsqgSolver probe(th, snap.s, o.solver);
    o.dt = p.at("cfl_target").get<double>() * std::min(th.hx(), th.hy()) / probe.max_speed();
  }
  ctx.tolerances["dt_requested"] = o.dt;
  const long dump = p.at("dump_every").get<long>();
  if (dump > 0)
    o.observer = [&](long step, const BoxField &f) {
      if (step % dump != 0)
        return;
      std::ostringstream os;
      os << "x1,x2,theta\n";
      for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
          Vec2 x = f.point(i, j);
          os << csv_row({x.x1, x.x2, f.at(i, j)});
        }
      char name[64];
      std::snprintf(name, sizeof name, "theta_%06ld.csv", step);
      ctx.write(name, os.str());
    };
  ctx.note("evolving " + std::to_string(th.nx) + "x" + std::to_string(th.ny) + " to T=" +
           format_number(o.T));
  TravellingReport rep = run_travelling_test(th, snap.s, snap.W, o);
  std::ostringstream os;
  write_travelling_csv(rep, os);
  ctx.write("travelling.csv", os.str());

  ojson r;
  r["s"] = snap.s;
  r["nx"] = th.nx;
  r["ny"] = th.ny;
  r["Lx"] = th.Lx;
  r["l"] = th.Ly;
  r["dt"] = o.T / std::max(1L, std::lround(std::ceil(o.T / o.dt - 1e-9)));
  r["steps"] = rep.steps;
  r["dealias"] = o.solver.dealias;
  r["filter"] = o.solver.filter;
  r["strip_frame"] = o.solver.strip_frame;
  r["W_expected"] = rep.W_expected;
  r["W_measured"] = rep.W_measured;
  r["W_relative_error"] = rep.W_measured / rep.W_expected - 1.0;
  r["x1_drift"] = rep.x1_drift;
  r["shape_error"] = rep.shape_error;
  r["casimir1_drift"] = rep.casimir1_drift;
  r["casimir2_relative_drift"] = rep.casimir2_drift;
  r["hamiltonian_relative_drift"] = rep.hamiltonian_drift;
  r["unstable"] = rep.unstable;
  r["message"] = rep.message;
  if (p.at("image_check").get<bool>() && !rep.unstable) {
    ctx.note("repeating on the doubled box");
    TravellingOptions o2 = o;
    o2.observer = nullptr;
    TravellingReport rep2 = run_travelling_test(widen(th), snap.s, snap.W, o2);
    r["image_check"] = {{"Lx", 2.0 * th.Lx},
                        {"W_measured", rep2.W_measured},
                        {"W_difference", rep2.W_measured - rep.W_measured},
                        {"shape_error", rep2.shape_error}};
  }
  ctx.write("report.json", r.dump(2) + "\n");
  if (rep.unstable)
    throw CflError("evolver instability: " + rep.message, 0.0);
}

} // namespace

RunResult run_experiment(const ExperimentSpec &spec, const RunOptions &options) {
  RunResult res;
  const auto t0 = std::chrono::steady_clock::now();
  Context ctx;
  ctx.verbose = options.verbose;
  ctx.log = options.log ? options.log : &std::clog;
  const std::string dir = options.out_dir.empty() ? spec.output_dir : options.out_dir;
  int threads = 1;
  try {
    if (dir.empty())
      throw DomainError("no output directory: pass --out or set output_dir in the spec");
    ctx.dir = dir;
    ensure_directory(ctx.dir);
    threads = resolve_threads(options.threads);
    set_threads(threads);
    ctx.note(kind_name(spec.kind) + " with " + std::to_string(threads) + " thread(s)");
    switch (spec.kind) {
    case ExperimentKind::speeds:
      run_speeds(spec.params, ctx);
      break;
    case ExperimentKind::solve_d:
      run_solve_d(spec.params, ctx);
      break;
    case ExperimentKind::pointvortex:
      run_pointvortex(spec.params, ctx);
      break;
    case ExperimentKind::plasma:
      run_plasma(spec.params, ctx);
      break;
    case ExperimentKind::assemble:
      run_assemble(spec.params, ctx);
      break;
    case ExperimentKind::residual_scaling:
      run_residual_scaling(spec.params, ctx);
      break;
    case ExperimentKind::reduction_root:
      run_reduction_root(spec.params, ctx);
      break;
    case ExperimentKind::evolve:
      run_evolve(spec.params, ctx);
      break;
    }
  } catch (const Error &e) {
    res.status = e.status();
    res.message = e.what();
  } catch (const std::exception &e) {
    res.status = 1;
    res.message = e.what();
  }
  res.artifacts = ctx.artifacts;
  if (!ctx.dir.empty() && fs::is_directory(ctx.dir)) {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ojson m;
    m["format_version"] = spec.format_version;
    m["kind"] = kind_name(spec.kind);
    m["status"] = res.status;
    m["message"] = res.message;
    m["spec"] = {{"format_version", spec.format_version},
                 {"kind", kind_name(spec.kind)},
                 {"output_dir", dir},
                 {"params", spec.params}};
    m["runtime_choices"] = ctx.tolerances;
    m["artifacts"] = ctx.artifacts;
    m["software"] = {{"karman", library_version()},
                     {"fftw", fftw_version_string()},
                     {"build", build_description()}};
    m["threads"] = threads;
    m["wall_clock_seconds"] = wall;
    try {
      write_file(ctx.dir / "manifest.json", m.dump(2) + "\n");
    } catch (const Error &e) {
      if (res.status == 0) {
        res.status = e.status();
        res.message = e.what();
      }
    }
  }
  return res;
}

int cli_main(int argc, char **argv) {
  CLI::App app{"Travelling vortex-street experiments for fractional active scalars"};
  app.require_subcommand(1);
  std::string spec_path, out_dir;
  std::optional<int> threads;
  bool verbose = false;
  std::map<std::string, ExperimentKind> subs;
  for (auto kind : {ExperimentKind::speeds, ExperimentKind::solve_d, ExperimentKind::pointvortex,
                    ExperimentKind::plasma, ExperimentKind::assemble,
                    ExperimentKind::residual_scaling, ExperimentKind::reduction_root,
                    ExperimentKind::evolve}) {
    auto *sub = app.add_subcommand(kind_name(kind), "run the " + kind_name(kind) + " experiment");
    sub->add_option("--spec", spec_path, "JSON experiment spec")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--threads", threads, "worker threads (default: KARMAN_THREADS)");
    sub->add_flag("--verbose", verbose, "progress on stderr");
    subs[kind_name(kind)] = kind;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  std::string text;
  try {
    text = read_file(spec_path);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  ValidationResult v = validate_spec(text, subs.at(name));
  if (!v.ok()) {
    std::cerr << "invalid spec '" << spec_path << "':\n";
    for (const auto &d : v.diagnostics)
      std::cerr << "  " << d.field << ": " << d.message << '\n';
    return 2;
  }
  RunOptions ro;
  ro.out_dir = out_dir;
  ro.threads = threads;
  ro.verbose = verbose;
  ro.log = &std::cerr;
  RunResult r = run_experiment(*v.spec, ro);
  if (r.status != 0) {
    std::cerr << "error (exit " << r.status << "): " << r.message << '\n';
    return r.status;
  }
  std::cout << name << ": wrote";
  for (const auto &a : r.artifacts)
    std::cout << ' ' << a;
  std::cout << " and manifest.json\n";
  return 0;
}

} // namespace karman
