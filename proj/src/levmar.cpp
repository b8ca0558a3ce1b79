#include "qcrsim/levmar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qcrsim {

bool cholesky_solve(std::vector<double> a, std::vector<double> b,
                    std::vector<double>& x, std::size_t n) {
  // Factor A = L L^T in place (lower triangle).
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (!(diag > 0.0)) return false;
    const double ljj = std::sqrt(diag);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
  // Forward then backward substitution.
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  x.assign(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * x[k];
    x[ii] = s / a[ii * n + ii];
  }
  return true;
}

namespace {

double cost_of(const std::vector<double>& r) {
  double c = 0.0;
  for (double v : r) c += v * v;
  return c;
}

// Central differences; falls back to a one-sided difference against the base
// residual when a perturbed evaluation fails (model boundary).
void numeric_jacobian(const ResidualFn& residuals, const std::vector<double>& p,
                      const std::vector<double>& r0, double step, std::size_t m,
                      std::vector<double>& jac) {
  const std::size_t n = p.size();
  jac.assign(m * n, 0.0);
  std::vector<double> rp(m), rm(m);
  std::vector<double> pp = p;
  for (std::size_t j = 0; j < n; ++j) {
    const double h = step * std::max(1.0, std::fabs(p[j]));
    bool have_p = true, have_m = true;
    try {
      pp[j] = p[j] + h;
      residuals(pp, rp);
    } catch (const std::exception&) {
      have_p = false;
    }
    try {
      pp[j] = p[j] - h;
      residuals(pp, rm);
    } catch (const std::exception&) {
      have_m = false;
    }
    pp[j] = p[j];
    if (have_p && have_m) {
      const double inv = 1.0 / (2.0 * h);
      for (std::size_t i = 0; i < m; ++i) jac[i * n + j] = (rp[i] - rm[i]) * inv;
    } else if (have_p) {
      for (std::size_t i = 0; i < m; ++i) jac[i * n + j] = (rp[i] - r0[i]) / h;
    } else if (have_m) {
      for (std::size_t i = 0; i < m; ++i) jac[i * n + j] = (r0[i] - rm[i]) / h;
    }
  }
}

}  // namespace

// cov = sig_sq * (J^T J)^-1, with a tiny progressive ridge when the normal
// matrix is singular (an unidentifiable parameter then shows up as a huge
// variance instead of a crash). The inversion runs on the column-equilibrated
// matrix so wildly different parameter units cannot poison the factorization.
std::vector<double> lm_covariance(const std::vector<double>& jac, std::size_t m,
                                  std::size_t n, double sig_sq) {
  std::vector<double> jtj(n * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        jtj[a * n + b] += jac[i * n + a] * jac[i * n + b];

  std::vector<double> scale(n, 1.0);
  for (std::size_t d = 0; d < n; ++d)
    if (jtj[d * n + d] > 0.0) scale[d] = std::sqrt(jtj[d * n + d]);

  std::vector<double> corr(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      corr[a * n + b] = jtj[a * n + b] / (scale[a] * scale[b]);

  std::vector<double> inv(n * n, 0.0);
  double ridge = 0.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    std::vector<double> a = corr;
    for (std::size_t d = 0; d < n; ++d) a[d * n + d] += ridge;
    bool ok = true;
    std::vector<double> col(n), x;
    for (std::size_t c = 0; c < n && ok; ++c) {
      std::fill(col.begin(), col.end(), 0.0);
      col[c] = 1.0;
      ok = cholesky_solve(a, col, x, n);
      if (ok)
        for (std::size_t rrow = 0; rrow < n; ++rrow) inv[rrow * n + c] = x[rrow];
    }
    if (ok) break;
    ridge = ridge == 0.0 ? 1e-14 : ridge * 10.0;
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      inv[a * n + b] *= sig_sq / (scale[a] * scale[b]);
  // Kill round-off asymmetry.
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const double s = 0.5 * (inv[a * n + b] + inv[b * n + a]);
      inv[a * n + b] = inv[b * n + a] = s;
    }
  return inv;
}

LmResult levenberg_marquardt(const ResidualFn& residuals, std::vector<double> p,
                             std::size_t m, const LmOptions& opts) {
  const std::size_t n = p.size();
  LmResult out;

  std::vector<double> r(m);
  residuals(p, r);
  double cost = cost_of(r);
  out.accepted_costs.push_back(cost);

  std::vector<double> jac;
  double lambda = opts.lambda0;
  bool need_jacobian = true;
  std::vector<double> jtj(n * n), g(n), step, p_try, r_try(m);

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (need_jacobian) {
      numeric_jacobian(residuals, p, r, opts.fd_step, m, jac);
      jtj.assign(n * n, 0.0);
      g.assign(n, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t a = 0; a < n; ++a) {
          g[a] += jac[i * n + a] * r[i];
          for (std::size_t b = 0; b < n; ++b)
            jtj[a * n + b] += jac[i * n + a] * jac[i * n + b];
        }
      }
      need_jacobian = false;
    }

    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::fabs(v));
    if (gmax <= opts.grad_tol * std::max(1.0, cost)) {
      out.converged = true;
      break;
    }

    // Damped normal equations with Marquardt diagonal scaling. The floor on
    // the scaling keeps near-dead parameter directions damped too, so their
    // steps cannot blow up and drown the live directions.
    double max_diag = 0.0;
    for (std::size_t d = 0; d < n; ++d) max_diag = std::max(max_diag, jtj[d * n + d]);
    std::vector<double> a = jtj;
    std::vector<double> rhs(n);
    for (std::size_t d = 0; d < n; ++d) {
      const double scaled = std::max(jtj[d * n + d], 1e-6 * std::max(max_diag, 1e-30));
      a[d * n + d] += lambda * scaled;
      rhs[d] = -g[d];
    }
    if (!cholesky_solve(a, rhs, step, n)) {
      lambda *= 10.0;
      if (lambda > opts.lambda_max) break;
      continue;
    }

    // Per-coordinate clamp: a runaway component (typically an unidentifiable
    // parameter) is bounded without shrinking the others.
    p_try = p;
    double step_max = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      double s = step[d];
      if (opts.max_step > 0.0) s = std::clamp(s, -opts.max_step, opts.max_step);
      p_try[d] += s;
      step_max = std::max(step_max, std::fabs(s));
    }
    // A trial the model cannot evaluate is simply a rejected step.
    double cost_try = std::numeric_limits<double>::infinity();
    try {
      residuals(p_try, r_try);
      cost_try = cost_of(r_try);
      if (!std::isfinite(cost_try))
        cost_try = std::numeric_limits<double>::infinity();
    } catch (const std::exception&) {
    }

    if (cost_try < cost) {
      // Predicted decrease of the Gauss-Newton model for the step actually
      // taken; stopping on it (not the achieved decrease) avoids quitting on
      // plateau stretches where a productive direction remains.
      double pred = 0.0;
      for (std::size_t a2 = 0; a2 < n; ++a2) {
        double aq = 0.0;
        for (std::size_t b2 = 0; b2 < n; ++b2)
          aq += jtj[a2 * n + b2] * (p_try[b2] - p[b2]);
        const double da = p_try[a2] - p[a2];
        pred += 2.0 * g[a2] * da + da * aq;
      }
      const double pred_rel = std::fabs(pred) / std::max(cost, 1e-300);
      p = p_try;
      r = r_try;
      cost = cost_try;
      out.accepted_costs.push_back(cost);
      lambda = std::max(lambda / 3.0, 1e-12);
      need_jacobian = true;
      if (pred_rel < opts.cost_rel_tol || step_max < opts.step_tol || cost == 0.0) {
        out.converged = true;
        ++it;
        break;
      }
    } else {
      lambda *= 3.0;
      if (lambda > opts.lambda_max) break;
    }
  }

  out.iterations = it;
  out.params = p;
  out.cost = cost;
  out.residual_rms = m > 0 ? std::sqrt(cost / static_cast<double>(m)) : 0.0;
  numeric_jacobian(residuals, p, r, opts.fd_step, m, jac);
  const double dof = static_cast<double>(m > n ? m - n : 1);
  out.covariance = lm_covariance(jac, m, n, cost / dof);
  return out;
}

}  // namespace qcrsim
