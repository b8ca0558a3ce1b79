#pragma once

#include <functional>
#include <vector>

namespace qcrsim {

// Small dense Levenberg-Marquardt with a numeric central-difference Jacobian.
// Parameters are whatever the caller packs in (log-space for positive-only
// quantities); residuals fill a fixed-size vector.
struct LmOptions {
  int max_iterations = 200;
  double cost_rel_tol = 1e-10;  // converged when accepted relative decrease falls below
  double grad_tol = 1e-12;
  double step_tol = 1e-14;
  double fd_step = 1e-6;        // absolute central-difference step per parameter
  double lambda0 = 1e-3;
  double lambda_max = 1e14;
  double max_step = 0.0;        // > 0: per-coordinate clamp on each step component
};

struct LmResult {
  std::vector<double> params;
  std::vector<double> covariance;      // n x n row-major, sigma^2 (J^T J)^-1
  std::vector<double> accepted_costs;  // cost after every accepted step
  double cost = 0.0;                   // sum of squared residuals
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ResidualFn =
    std::function<void(const std::vector<double>& params, std::vector<double>& r)>;

LmResult levenberg_marquardt(const ResidualFn& residuals, std::vector<double> initial,
                             std::size_t n_residuals, const LmOptions& opts = {});

// Solves A x = b for symmetric positive definite A (n x n row-major) in place
// via Cholesky; returns false if not positive definite.
bool cholesky_solve(std::vector<double> a, std::vector<double> b,
                    std::vector<double>& x, std::size_t n);

// sig_sq (J^T J)^-1 for an m x n Jacobian, with a progressive ridge if the
// normal matrix is singular; symmetric by construction.
std::vector<double> lm_covariance(const std::vector<double>& jac, std::size_t m,
                                  std::size_t n, double sig_sq);

}  // namespace qcrsim
