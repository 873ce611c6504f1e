// Serial twins against their OpenMP counterparts. Kernels without a separate
// serial entry point are run at 1 thread and at the OpenMP maximum.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "karman/parallel.hpp"
#include "karman/plasma.hpp"
#include "karman/pointvortex.hpp"
#include "karman/spectral.hpp"
#include "karman/street.hpp"

using namespace karman;

namespace {

BoxField smooth_field(int n) {
  BoxField f(n, n, 8.0, 1.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      Vec2 x = f.point(i, j);
      f.at(i, j) = std::exp(-8.0 * (x.x1 * x.x1 + x.x2 * x.x2)) *
                   std::sin(2.0 * std::numbers::pi * x.x2);
    }
  return f;
}

const StreetProfiles &street() {
  static StreetProfiles st = [] {
    StreetConfig c;
    c.s = 1.0;
    c.l = 1.6;
    c.d = 0.8;
    c.r_cut = 0.45;
    c.eps = c.sigma = 0.05;
    c.gamma1 = c.gamma2 = 2.0;
    return make_street_profiles(c);
  }();
  return st;
}

VortexConfiguration many_vortices() {
  VortexConfiguration c;
  c.l = 1.0;
  for (int k = 0; k < 32; ++k)
    c.vortices.push_back({{0.05 * k - 0.8, std::fmod(0.37 * k, 1.0) - 0.5}, k % 2 ? 1.0 : -0.7});
  return c;
}

void fft_forward(benchmark::State &state, bool parallel) {
  const int n = static_cast<int>(state.range(0));
  SpectralGrid g(n, n, 8.0, 1.0);
  BoxField f = smooth_field(n);
  Spectrum out;
  for (auto _ : state) {
    if (parallel)
      g.forward(f.values, out);
    else
      g.forward_serial(f.values, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void frac_laplacian(benchmark::State &state, bool parallel) {
  BoxField f = smooth_field(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    BoxField g = parallel ? frac_laplacian_apply(f, 0.5, 1) : frac_laplacian_apply_serial(f, 0.5, 1);
    benchmark::DoNotOptimize(g.values.data());
  }
}

void rk4_step(benchmark::State &state, bool parallel) {
  BoxField f = smooth_field(static_cast<int>(state.range(0)));
  SolverOptions o;
  o.parallel = parallel;
  GsqgSolver solver(f, 1.0, o);
  const double dt = 0.1 * std::min(f.hx(), f.hy()) / solver.max_speed();
  for (auto _ : state)
    solver.step(dt);
}

void street_sampling(benchmark::State &state, bool parallel) {
  const int n = static_cast<int>(state.range(0));
  const StreetProfiles &st = street();
  for (auto _ : state) {
    auto v = parallel ? sample_vorticity(st, n, n, 12.8) : sample_vorticity_serial(st, n, n, 12.8);
    benchmark::DoNotOptimize(v.data());
  }
}

void induced(benchmark::State &state, bool parallel) {
  const VortexConfiguration c = many_vortices();
  LatticeSumPolicy pol;
  for (auto _ : state) {
    auto v = parallel ? induced_velocities(c, 0.75, pol) : induced_velocities_serial(c, 0.75, pol);
    benchmark::DoNotOptimize(v.data());
  }
}

void residual_norms(benchmark::State &state) {
  set_threads(static_cast<int>(state.range(0)));
  const StreetProfiles &st = street();
  for (auto _ : state) {
    ResidualReport r = residual_field(st, {32, 2.0});
    benchmark::DoNotOptimize(r.norms.starstar);
  }
}

void plasma_rows(benchmark::State &state) {
  set_threads(static_cast<int>(state.range(0)));
  FractionalGridSpec g;
  g.core_nodes = 64;
  for (auto _ : state) {
    RadialProfile p = solve_plasma_fractional(0.5, 2.5, g);
    benchmark::DoNotOptimize(p.mass);
  }
}

} // namespace

BENCHMARK_CAPTURE(fft_forward, serial, false)->Arg(256)->Arg(512);
BENCHMARK_CAPTURE(fft_forward, openmp, true)->Arg(256)->Arg(512);
BENCHMARK_CAPTURE(frac_laplacian, serial, false)->Arg(256)->Arg(512);
BENCHMARK_CAPTURE(frac_laplacian, openmp, true)->Arg(256)->Arg(512);
BENCHMARK_CAPTURE(rk4_step, serial, false)->Arg(256);
BENCHMARK_CAPTURE(rk4_step, openmp, true)->Arg(256);
BENCHMARK_CAPTURE(street_sampling, serial, false)->Arg(128);
BENCHMARK_CAPTURE(street_sampling, openmp, true)->Arg(128);
BENCHMARK_CAPTURE(induced, serial, false);
BENCHMARK_CAPTURE(induced, openmp, true);
BENCHMARK(residual_norms)->Arg(1)->Arg(max_threads())->Unit(benchmark::kMillisecond);
BENCHMARK(plasma_rows)->Arg(1)->Arg(max_threads())->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
