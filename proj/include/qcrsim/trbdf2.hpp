#pragma once

#include <functional>
#include <vector>

namespace qcrsim {

// Small-dimension stiff initial-value problem dy/dt = f(t, y) with a dense
// analytic Jacobian, integrated by TR-BDF2 (one-step, L-stable composite
// trapezoidal/BDF2 scheme with an embedded third-order error estimate).
struct OdeSystem {
  std::size_t n = 0;
  std::function<void(double t, const double* y, double* f)> rhs;
  std::function<void(double t, const double* y, double* jac)> jacobian;  // row-major
};

struct OdeOptions {
  double rel_tol = 1e-6;
  std::vector<double> abs_tol;       // per-component; required
  double h_init = 0.0;               // 0 -> automatic
  double h_min = 1e-22;
  double h_max = 0.0;                // 0 -> span/4
  std::vector<double> breakpoints;   // times the solver must land on exactly
  long max_steps = 2000000;
};

struct OdeSolution {
  std::vector<double> t;
  std::vector<std::vector<double>> y;  // y[k] is the state at t[k]
  long steps = 0;
  long rejected = 0;
  long newton_iterations = 0;
};

// Throws SolverError on step-size underflow, non-finite state, or an
// exhausted step budget.
OdeSolution integrate_trbdf2(const OdeSystem& sys, double t0, double t1,
                             std::vector<double> y0, const OdeOptions& opts);

}  // namespace qcrsim
