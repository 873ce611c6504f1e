#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "karman/errors.hpp"

namespace karman {

enum class TailMode { none, integral, closed_form };

struct LatticeSumPolicy {
  long truncation_K = 32;  // first truncation tried
  TailMode tail = TailMode::closed_form;
  double tolerance = 1e-12; // absolute
  long max_K = 1L << 22;
};

struct LatticeSum {
  double value = 0.0;
  double error = 0.0;
  long K = 0;
};

template <std::size_t N> struct LatticeSumN {
  std::array<double, N> value{};
  double error = 0.0;
  long K = 0;
};

void validate_policy(const LatticeSumPolicy &policy);

/// Raises the starting truncation so that K l exceeds 16x the given extent/l.
LatticeSumPolicy policy_for_extent(const LatticeSumPolicy &policy, double extent_over_l);
TailMode parse_tail_mode(const std::string &name);
std::string tail_mode_name(TailMode mode);

namespace detail {

// Euler-Maclaurin midpoint tail of sum_{k>K} A (k+c)^{-p}, divided by A.
inline double asymptotic_tail(long K, double p, bool em, double c = 0.0) {
  double m = K + c + 0.5;
  double t = std::pow(m, 1.0 - p) / (p - 1.0);
  if (em)
    t += p / 24.0 * std::pow(m, -1.0 - p);
  return t;
}

} // namespace detail

/// Sums t(1) + t(2) + ... where t(k) ~ A (k+shift)^{-p} (1 + O(k^-2)), p > 1,
/// componentwise. Terms are added in increasing k; K doubles until the
/// error estimate meets policy.tolerance.
template <std::size_t N, class Term>
LatticeSumN<N> sum_series(Term &&term, double p, const LatticeSumPolicy &policy,
                          double shift = 0.0) {
  validate_policy(policy);
  using Arr = std::array<double, N>;
  Arr S{};
  long k = 0;
  auto advance_to = [&](long K) {
    while (k < K) {
      ++k;
      Arr t = term(k);
      for (std::size_t c = 0; c < N; ++c)
        S[c] += t[c];
    }
  };

  const bool richardson = policy.tail == TailMode::closed_form;
  const double rfac = 1.0 / (std::pow(2.0, 1.0 + p) - 1.0);
  Arr prev_raw{}, prev_est{};
  bool have_raw = false, have_est = false;
  double last_err = INFINITY;

  for (long K = policy.truncation_K; K <= policy.max_K; K *= 2) {
    advance_to(K);
    Arr next = term(K + 1);
    if (policy.tail == TailMode::none) {
      double err = 0.0;
      for (std::size_t c = 0; c < N; ++c)
        err = std::max(err, std::abs(next[c]) * (K + 1) / (p - 1.0));
      if (err <= policy.tolerance)
        return {S, err, K};
      last_err = err;
      continue;
    }
    Arr raw{};
    double scale = std::pow(K + 1 + shift, p) * detail::asymptotic_tail(K, p, richardson, shift);
    for (std::size_t c = 0; c < N; ++c)
      raw[c] = S[c] + next[c] * scale;
    Arr est = raw;
    bool ready = true;
    if (richardson) {
      if (have_raw) {
        for (std::size_t c = 0; c < N; ++c)
          est[c] = raw[c] + (raw[c] - prev_raw[c]) * rfac;
      } else {
        ready = false;
      }
      prev_raw = raw;
      have_raw = true;
    }
    if (!ready)
      continue;
    if (have_est) {
      double err = 0.0;
      for (std::size_t c = 0; c < N; ++c)
        err = std::max(err, std::abs(est[c] - prev_est[c]));
      if (err <= policy.tolerance)
        return {est, err, K};
      last_err = err;
    }
    prev_est = est;
    have_est = true;
  }
  throw ConvergenceError("lattice sum did not reach tolerance " +
                             std::to_string(policy.tolerance) + " within K=" +
                             std::to_string(policy.max_K),
                         last_err);
}

template <class Term>
LatticeSum sum_series(Term &&term, double p, const LatticeSumPolicy &policy,
                      double shift = 0.0) {
  auto r = sum_series<1>([&](long k) { return std::array<double, 1>{term(k)}; }, p, policy, shift);
  return {r.value[0], r.error, r.K};
}

} // namespace karman
