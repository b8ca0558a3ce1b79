#pragma once

#include <stdexcept>
#include <string>

namespace qcrsim {

// Adaptive quadrature did not reach the requested tolerance. Carries the
// best available estimate so callers can report it.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& msg, double estimate, double error_bound)
      : std::runtime_error(msg), estimate_(estimate), error_bound_(error_bound) {}
  double estimate() const { return estimate_; }
  double error_bound() const { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

// Stiff-integrator failure (step-size underflow, non-finite state, step budget).
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& msg, double t_fail)
      : std::runtime_error(msg), t_fail_(t_fail) {}
  double time_of_failure() const { return t_fail_; }

 private:
  double t_fail_;
};

// Degenerate least-squares problem (non-decaying curve, zero model rate, ...).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Strict-schema configuration problems; message carries the offending key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// CSV/JSON input problems; message names the file and line where possible.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qcrsim
