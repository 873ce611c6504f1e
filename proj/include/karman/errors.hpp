#pragma once

#include <stdexcept>
#include <string>

namespace karman {

/// Base of all library failures; `status()` is the CLI exit code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual int status() const { return 1; }
};

// validation family (exit 2)
class DomainError : public Error {
public:
  using Error::Error;
  int status() const override { return 2; }
};
class SingularityError : public DomainError {
public:
  using DomainError::DomainError;
};
class CollisionError : public DomainError {
public:
  CollisionError(const std::string &what, double time)
      : DomainError(what), time_(time) {}
  double time() const { return time_; }

private:
  double time_;
};
class ResolutionError : public DomainError {
public:
  using DomainError::DomainError;
};
class MeanError : public DomainError {
public:
  using DomainError::DomainError;
};
class AmbiguityError : public DomainError {
public:
  using DomainError::DomainError;
};

// numerical non-convergence (exit 3)
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string &what, double residual = 0.0)
      : Error(what), residual_(residual) {}
  int status() const override { return 3; }
  double residual() const { return residual_; }

private:
  double residual_;
};
class MatchingError : public ConvergenceError {
public:
  using ConvergenceError::ConvergenceError;
};

// infeasible speed target (exit 4)
class FeasibilityError : public Error {
public:
  FeasibilityError(const std::string &what, double lo, double hi)
      : Error(what), lo_(lo), hi_(hi) {}
  int status() const override { return 4; }
  double lower() const { return lo_; }
  double upper() const { return hi_; }

private:
  double lo_, hi_;
};

// evolver instability (exit 5)
class CflError : public Error {
public:
  CflError(const std::string &what, double suggested_dt)
      : Error(what), dt_(suggested_dt) {}
  int status() const override { return 5; }
  double suggested_dt() const { return dt_; }

private:
  double dt_;
};

} // namespace karman
