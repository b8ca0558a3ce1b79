#include "qcrsim/trbdf2.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qcrsim/errors.hpp"

namespace qcrsim {

namespace {

constexpr double kGamma = 2.0 - 1.41421356237309504880;  // 2 - sqrt(2)
constexpr double kD = kGamma / 2.0;                      // diagonal RK coefficient
constexpr double kW = 1.41421356237309504880 / 4.0;      // sqrt(2)/4

// Embedded third-order weights (Hosea & Shampine).
constexpr double kBhat1 = (1.0 - kW) / 3.0;
constexpr double kBhat2 = (3.0 * kW + 1.0) / 3.0;
constexpr double kBhat3 = kD / 3.0;

// Dense LU with partial pivoting, in place; solves a x = b.
bool lu_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
  std::vector<std::size_t> piv(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::fabs(a[i * n + k]) > std::fabs(a[p * n + k])) p = i;
    piv[k] = p;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
      std::swap(b[k], b[p]);
    }
    const double pivot = a[k * n + k];
    if (pivot == 0.0 || !std::isfinite(pivot)) return false;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = a[i * n + k] / pivot;
      a[i * n + k] = m;
      for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= m * a[k * n + j];
      b[i] -= m * b[k];
    }
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a[ii * n + j] * b[j];
    b[ii] = s / a[ii * n + ii];
  }
  return true;
}

struct Workspace {
  std::vector<double> f0, f2, f3, y2, y3, rhs, newton_mat, newton_mat_lu, jac,
      delta, est;
};

}  // namespace

OdeSolution integrate_trbdf2(const OdeSystem& sys, double t0, double t1,
                             std::vector<double> y0, const OdeOptions& opts) {
  const std::size_t n = sys.n;
  if (y0.size() != n) throw std::invalid_argument("trbdf2: state size mismatch");
  if (opts.abs_tol.size() != n)
    throw std::invalid_argument("trbdf2: abs_tol size mismatch");
  if (!(t1 > t0)) throw std::invalid_argument("trbdf2: need t1 > t0");

  // Stop-point list: breakpoints inside (t0, t1) plus t1, ascending.
  std::vector<double> stops;
  for (double b : opts.breakpoints)
    if (b > t0 && b < t1) stops.push_back(b);
  stops.push_back(t1);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  OdeSolution sol;
  sol.t.push_back(t0);
  sol.y.push_back(y0);

  const double span = t1 - t0;
  const double h_max = opts.h_max > 0.0 ? opts.h_max : span / 4.0;
  double h = opts.h_init > 0.0 ? opts.h_init : std::min(h_max, span * 1e-4);

  Workspace w;
  w.f0.resize(n);
  w.f2.resize(n);
  w.f3.resize(n);
  w.y2.resize(n);
  w.y3.resize(n);
  w.rhs.resize(n);
  w.jac.resize(n * n);
  w.newton_mat.resize(n * n);
  w.delta.resize(n);
  w.est.resize(n);

  double t = t0;
  std::vector<double> y = std::move(y0);
  std::size_t next_stop = 0;
  bool f0_valid = false;

  auto wrms = [&](const std::vector<double>& v, const std::vector<double>& ya,
                  const std::vector<double>& yb) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double scale =
          opts.abs_tol[i] +
          opts.rel_tol * std::max(std::fabs(ya[i]), std::fabs(yb[i]));
      const double q = v[i] / scale;
      acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(n));
  };

  // Simplified Newton: both stages share the matrix I - h*d*J(t_n, y_n),
  // assembled and factored once per step attempt. The frozen Jacobian only
  // affects the convergence rate, not the converged stage values.
  auto factor_newton_matrix = [&](double t_at, const std::vector<double>& y_at,
                                  double h_step) {
    sys.jacobian(t_at, y_at.data(), w.jac.data());
    for (std::size_t i = 0; i < n * n; ++i) w.newton_mat[i] = -h_step * kD * w.jac[i];
    for (std::size_t i = 0; i < n; ++i) w.newton_mat[i * n + i] += 1.0;
    return true;
  };

  // Newton solve for z in z = base + h*kD*f(tz, z); returns false on failure.
  auto solve_stage = [&](double tz, const std::vector<double>& base,
                         std::vector<double>& z, double h_step) {
    double prev_norm = 1e300;
    for (int iter = 0; iter < 12; ++iter) {
      sys.rhs(tz, z.data(), w.rhs.data());
      for (std::size_t i = 0; i < n; ++i) {
        w.delta[i] = base[i] + h_step * kD * w.rhs[i] - z[i];
        if (!std::isfinite(w.delta[i])) return false;
      }
      w.newton_mat_lu = w.newton_mat;
      std::vector<double> dz = w.delta;
      if (!lu_solve(w.newton_mat_lu, dz, n)) return false;
      double norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        z[i] += dz[i];
        const double scale =
            opts.abs_tol[i] + opts.rel_tol * std::max(std::fabs(z[i]), 1e-300);
        norm = std::max(norm, std::fabs(dz[i]) / scale);
      }
      ++sol.newton_iterations;
      if (norm < 5e-3) return true;
      if (iter > 3 && norm > 0.9 * prev_norm) return false;  // stalling
      prev_norm = norm;
    }
    return false;
  };

  while (t < t1) {
    if (sol.steps + sol.rejected > opts.max_steps)
      throw SolverError("trbdf2: step budget exhausted at t=" + std::to_string(t), t);

    const double stop = stops[next_stop];
    h = std::min(h, h_max);
    bool lands_on_stop = false;
    if (t + h >= stop) {
      h = stop - t;
      lands_on_stop = true;
    } else if (t + 1.5 * h >= stop) {
      h = 0.5 * (stop - t);  // avoid a sliver step next time
    }
    if (h < opts.h_min)
      throw SolverError("trbdf2: step size underflow at t=" + std::to_string(t), t);

    if (!f0_valid) {
      sys.rhs(t, y.data(), w.f0.data());
      f0_valid = true;
    }
    factor_newton_matrix(t, y, h);

    // Stage 1 (trapezoidal to t + gamma*h).
    std::vector<double> base1(n);
    for (std::size_t i = 0; i < n; ++i) {
      base1[i] = y[i] + h * kD * w.f0[i];
      w.y2[i] = y[i] + h * kGamma * w.f0[i];  // predictor
    }
    bool ok = solve_stage(t + kGamma * h, base1, w.y2, h);

    // Stage 2 (BDF2 to t + h).
    if (ok) {
      const double c_y2 = 1.0 / (kGamma * (2.0 - kGamma));
      const double c_y0 = (1.0 - kGamma) * (1.0 - kGamma) / (kGamma * (2.0 - kGamma));
      std::vector<double> base2(n);
      for (std::size_t i = 0; i < n; ++i) {
        base2[i] = c_y2 * w.y2[i] - c_y0 * y[i];
        w.y3[i] = y[i] + (w.y2[i] - y[i]) / kGamma;  // linear predictor
      }
      ok = solve_stage(t + h, base2, w.y3, h);
      if (ok) {
        // Recover stage derivatives algebraically from the solved stages.
        for (std::size_t i = 0; i < n; ++i) {
          w.f2[i] = (w.y2[i] - base1[i]) / (h * kD);
          w.f3[i] = (w.y3[i] - base2[i]) / (h * kD);
        }
      }
    }

    if (ok) {
      // Embedded error estimate, filtered through (I - h*d*J).
      for (std::size_t i = 0; i < n; ++i)
        w.est[i] = h * ((kW - kBhat1) * w.f0[i] + (kW - kBhat2) * w.f2[i] +
                        (kD - kBhat3) * w.f3[i]);
      std::vector<double> lu = w.newton_mat;
      std::vector<double> est = w.est;
      if (lu_solve(lu, est, n)) w.est = est;

      const double err = wrms(w.est, y, w.y3);
      if (err <= 1.0) {
        t = lands_on_stop ? stop : t + h;  // land on stop points exactly
        y = w.y3;
        for (std::size_t i = 0; i < n; ++i) {
          if (!std::isfinite(y[i]))
            throw SolverError("trbdf2: non-finite state at t=" + std::to_string(t), t);
        }
        sol.t.push_back(t);
        sol.y.push_back(y);
        ++sol.steps;
        f0_valid = false;
        if (t >= stop && next_stop + 1 < stops.size()) ++next_stop;
        const double grow =
            err > 0.0 ? 0.9 * std::pow(err, -1.0 / 3.0) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
        continue;
      }
      ++sol.rejected;
      const double shrink = 0.9 * std::pow(std::max(err, 1e-10), -1.0 / 3.0);
      h *= std::clamp(shrink, 0.1, 0.9);
    } else {
      ++sol.rejected;
      h *= 0.25;
    }
  }

  return sol;
}

}  // namespace qcrsim
