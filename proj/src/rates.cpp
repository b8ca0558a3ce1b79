#include "qcrsim/rates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "qcrsim/constants.hpp"
#include "qcrsim/errors.hpp"
#include "qcrsim/parallel.hpp"

namespace qcrsim {

double QcrQubitParams::coupling_rho() const {
  const double a = alpha();
  return constants::pi * a * a * z_r / constants::r_k;
}

double QcrQubitParams::e_qubit() const { return constants::h * f0; }

void QcrQubitParams::validate() const {
  jp.validate();
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::invalid_argument(std::string("QcrQubitParams: ") + name +
                                  " must be > 0");
  };
  positive(c_c, "c_c");
  positive(c_g, "c_g");
  positive(c_nis, "c_nis");
  positive(c_q, "c_q");
  positive(z_r, "z_r");
  positive(f0, "f0");
  positive(kappa, "kappa");
  const double a = alpha();
  if (!(a > 0.0 && a < 1.0))
    throw std::invalid_argument("QcrQubitParams: alpha outside (0, 1)");
}

std::pair<double, double> junction_rates(double v_j, const QcrQubitParams& p,
                                         double rel_tol) {
  const double scale = p.kappa * p.coupling_rho();
  const double eq = p.e_qubit();
  const double ev = constants::e * v_j;
  const double g10 =
      scale * (rate_f(eq + ev, p.jp, rel_tol) + rate_f(eq - ev, p.jp, rel_tol));
  const double g01 =
      scale * (rate_f(-eq + ev, p.jp, rel_tol) + rate_f(-eq - ev, p.jp, rel_tol));
  return {g10, g01};
}

std::pair<double, double> qubit_rates(double v_qcr, const QcrQubitParams& p,
                                      double rel_tol) {
  const auto [g10, g01] = junction_rates(0.5 * v_qcr, p, rel_tol);
  return {2.0 * g10, 2.0 * g01};
}

RateTable t1_qcr_curve(std::vector<double> v_grid, const QcrQubitParams& p,
                       double rel_tol) {
  if (v_grid.empty())
    throw std::invalid_argument("t1_qcr_curve: empty voltage grid");
  for (double v : v_grid) {
    if (!std::isfinite(v))
      throw std::invalid_argument("t1_qcr_curve: non-finite grid voltage");
  }
  p.validate();
  std::sort(v_grid.begin(), v_grid.end());

  RateTable table;
  const std::size_t n = v_grid.size();
  table.v_qcr = std::move(v_grid);
  table.gamma10.resize(n);
  table.gamma01.resize(n);
  table.t1.resize(n);
  parallel_for(n, [&](std::size_t i) {
    const auto [g10, g01] = qubit_rates(table.v_qcr[i], p, rel_tol);
    table.gamma10[i] = g10;
    table.gamma01[i] = g01;
    table.t1[i] = 1.0 / (g10 + g01);
  });
  return table;
}

double residual_population(const QcrQubitParams& p, double v, double rel_tol) {
  const auto [g10, g01] = qubit_rates(v, p, rel_tol);
  const double sum = g10 + g01;
  if (!(sum > 0.0))
    throw FitError("residual_population: both transition rates vanish");
  return g01 / sum;
}

double onoff_ratio_estimate(const QcrQubitParams& p) {
  // sqrt(delta / (2 pi hbar f0 gamma^2)) with 2 pi hbar = h; written with the
  // gamma factored out so the gamma and f0 scalings are exact.
  return std::sqrt(p.jp.delta / (constants::h * p.f0)) / p.jp.gamma_dynes;
}

double calibrate_kappa(const QcrQubitParams& p, double target_t1_off,
                       double rel_tol) {
  if (!(target_t1_off > 0.0))
    throw std::invalid_argument("calibrate_kappa: target_t1_off must be > 0");
  QcrQubitParams unit = p;
  unit.kappa = 1.0;
  const auto [g10, g01] = qubit_rates(0.0, unit, rel_tol);
  const double sum = g10 + g01;
  if (!(sum > 0.0))
    throw FitError("calibrate_kappa: model rate at kappa=1 is zero");
  return (1.0 / sum) / target_t1_off;
}

std::string rate_table_csv(const RateTable& table,
                           const std::vector<std::string>& comments) {
  std::string out;
  out.reserve(64 + table.v_qcr.size() * 80);
  for (const std::string& c : comments) {
    out += "# ";
    out += c;
    out += '\n';
  }
  out += "v_qcr_V,gamma10_hz,gamma01_hz,t1_s\n";
  char line[160];
  for (std::size_t i = 0; i < table.v_qcr.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n",
                  table.v_qcr[i], table.gamma10[i], table.gamma01[i],
                  table.t1[i]);
    out += line;
  }
  return out;
}

namespace {

// Fritsch-Carlson monotone cubic slopes.
std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  if (n == 2) {
    d[0] = d[1] = delta[0];
    return d;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      d[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::fabs(s) > 3.0 * std::fabs(d0)) return 3.0 * d0;
    return s;
  };
  d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return d;
}

double pchip_eval(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& d, double xq) {
  const auto it = std::upper_bound(x.begin(), x.end(), xq);
  std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  if (i >= x.size() - 1) i = x.size() - 2;
  const double h = x[i + 1] - x[i];
  const double t = (xq - x[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y[i] + h10 * h * d[i] + h01 * y[i + 1] + h11 * h * d[i + 1];
}

}  // namespace

RateInterpolator::RateInterpolator(const QcrQubitParams& p, double v_abs_max,
                                   int n_points, double rel_tol)
    : p_(p), rel_tol_(rel_tol), v_max_(v_abs_max) {
  if (!(v_abs_max > 0.0) || n_points < 4)
    throw std::invalid_argument("RateInterpolator: need v_abs_max > 0, n >= 4");
  p.validate();
  v_.resize(static_cast<std::size_t>(n_points));
  log10_.resize(v_.size());
  log01_.resize(v_.size());
  for (std::size_t i = 0; i < v_.size(); ++i)
    v_[i] = v_abs_max * static_cast<double>(i) / static_cast<double>(n_points - 1);
  parallel_for(v_.size(), [&](std::size_t i) {
    const auto [g10, g01] = junction_rates(v_[i], p_, rel_tol_);
    log10_[i] = std::log(std::max(g10, 1e-300));
    log01_[i] = std::log(std::max(g01, 1e-300));
  });
  d10_ = pchip_slopes(v_, log10_);
  d01_ = pchip_slopes(v_, log01_);
}

std::pair<double, double> RateInterpolator::rates(double v_j) const {
  const double a = std::fabs(v_j);
  if (a > v_max_) return junction_rates(v_j, p_, rel_tol_);
  return {std::exp(pchip_eval(v_, log10_, d10_, a)),
          std::exp(pchip_eval(v_, log01_, d01_, a))};
}

}  // namespace qcrsim
