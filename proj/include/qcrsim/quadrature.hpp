#pragma once

#include <functional>
#include <vector>

namespace qcrsim::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;  // absolute error estimate
  int evaluations = 0;
  bool converged = false;
};

inline constexpr double default_rel_tol = 1e-9;
inline constexpr double default_abs_tol = 1e-30;

// Adaptive Gauss-Kronrod 7/15 on [a, b]. Globally adaptive: the interval with
// the largest error estimate is bisected until
//   sum(err) <= max(rel_tol * |sum(value)|, abs_tol)
// or the interval budget runs out (converged = false in that case).
// Fully deterministic: identical inputs give bit-identical results.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = default_rel_tol, double abs_tol = default_abs_tol,
                 int max_intervals = 800);

// Integrates over [pts[0], pts[1]], [pts[1], pts[2]], ... and sums the pieces.
// Breakpoints let callers pin known kinks/near-singularities of the integrand.
Result integrate_segmented(const std::function<double(double)>& f,
                           const std::vector<double>& breakpoints,
                           double rel_tol = default_rel_tol,
                           double abs_tol = default_abs_tol);

// Throwing wrapper: returns value or raises IntegrationError with the
// achieved estimate when the tolerance was not met.
double integrate_or_throw(const std::function<double(double)>& f,
                          const std::vector<double>& breakpoints,
                          double rel_tol = default_rel_tol,
                          double abs_tol = default_abs_tol);

}  // namespace qcrsim::quad
