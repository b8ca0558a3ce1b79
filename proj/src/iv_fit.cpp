#include "qcrsim/iv_fit.hpp"

#include <algorithm>
#include <charconv>
#include <vector>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qcrsim/constants.hpp"
#include "qcrsim/errors.hpp"
#include "qcrsim/levmar.hpp"
#include "qcrsim/parallel.hpp"

#include "json.hpp"

namespace qcrsim {

void IvDataset::validate() const {
  if (voltage.size() != current.size())
    throw std::invalid_argument("IvDataset: voltage/current size mismatch");
  if (voltage.size() < 8)
    throw std::invalid_argument("IvDataset: need at least 8 points");
  double vmin = voltage[0], vmax = voltage[0];
  for (std::size_t i = 0; i < voltage.size(); ++i) {
    if (!std::isfinite(voltage[i]) || !std::isfinite(current[i]))
      throw std::invalid_argument("IvDataset: non-finite sample");
    vmin = std::min(vmin, voltage[i]);
    vmax = std::max(vmax, voltage[i]);
  }
  if (!(vmax > vmin))
    throw std::invalid_argument("IvDataset: all voltages equal");
}

double model_sinis_current(double v, const JunctionParams& jp, double rel_tol) {
  return nis_current(0.5 * v, jp, rel_tol);
}

JunctionParams default_iv_init(const IvDataset& data) {
  // Sort samples by voltage once.
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.voltage[a] < data.voltage[b];
  });

  // R_T from the overall slope of the top-|v| 20% of points (ohmic regime,
  // SINIS slope = 1/(2 R_T)).
  const std::size_t n = order.size();
  const std::size_t tail = std::max<std::size_t>(2, n / 5);
  auto slope_between = [&](std::size_t i0, std::size_t i1) {
    const double dv = data.voltage[order[i1]] - data.voltage[order[i0]];
    const double di = data.current[order[i1]] - data.current[order[i0]];
    return dv != 0.0 ? di / dv : 0.0;
  };
  const double slope_hi = slope_between(n - tail, n - 1);
  const double slope_lo = slope_between(0, tail - 1);
  const double slope = 0.5 * (std::fabs(slope_hi) + std::fabs(slope_lo));
  double r_t = slope > 0.0 ? 1.0 / (2.0 * slope) : 1e4;
  r_t = std::clamp(r_t, 1.0, 1e9);

  // Gap from the bias of maximum curvature of I(v): onset near v = 2 delta/e.
  double best_curv = 0.0, v_onset = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double v0 = data.voltage[order[k - 1]];
    const double v1 = data.voltage[order[k]];
    const double v2 = data.voltage[order[k + 1]];
    if (v2 - v0 <= 0.0) continue;
    const double d1 = slope_between(k - 1, k);
    const double d2 = slope_between(k, k + 1);
    const double curv = std::fabs(d2 - d1) / (0.5 * (v2 - v0));
    if (curv > best_curv) {
      best_curv = curv;
      v_onset = std::fabs(v1);
    }
  }
  double delta_ev = v_onset > 0.0 ? 0.5 * v_onset : 100e-6;
  delta_ev = std::clamp(delta_ev, 1e-6, 1e-2);

  JunctionParams jp;
  jp.r_t_nis = r_t;
  jp.delta = constants::ev_to_joule(delta_ev);
  jp.gamma_dynes = 1e-4;
  jp.t_n = 0.1;
  return jp;
}

IvFitResult fit_iv(const IvDataset& data, const JunctionParams& init,
                   const FitOptions& opts) {
  data.validate();
  init.validate();

  IvFitResult out;
  out.params = init;

  double i_max = 0.0;
  for (double c : data.current) i_max = std::max(i_max, std::fabs(c));
  if (i_max == 0.0) {
    // All-zero currents: no information at all, report non-convergence with
    // the (valid) initial parameters untouched.
    out.converged = false;
    return out;
  }

  const double t_s = init.t_s;  // NaN keeps t_s tied to the running t_n
  const std::size_t m = data.size();

  // Residuals normalized by the current scale so the optimizer's stopping
  // thresholds see O(1) quantities regardless of units.
  const double i_scale = i_max;
  auto residuals = [&](const std::vector<double>& theta, std::vector<double>& r) {
    JunctionParams jp;
    jp.r_t_nis = std::exp(theta[0]);
    jp.delta = std::exp(theta[1]);
    jp.gamma_dynes = std::exp(theta[2]);
    jp.t_n = std::exp(theta[3]);
    jp.t_s = t_s;
    jp.validate();  // out-of-domain trials surface as rejected steps
    if (jp.t_n < 1e-6 || jp.t_n > 1e3)
      throw FitError("fit_iv: temperature outside the model's domain");
    r.resize(m);
    parallel_for(m, [&](std::size_t i) {
      r[i] = (model_sinis_current(data.voltage[i], jp, opts.quad_rel_tol) -
              data.current[i]) /
             i_scale;
    });
  };

  LmOptions lm;
  lm.max_iterations = opts.max_iterations;
  lm.cost_rel_tol = opts.cost_rel_tol;
  lm.fd_step = opts.fd_step;
  // Cautious start: short damped steps until the quadratic model proves
  // itself, which keeps the weakly identified gamma/T combination from
  // vaulting into the secondary basin of the subgap trade-off.
  lm.lambda0 = 1.0;
  lm.max_step = 2.0;

  std::vector<double> theta = {std::log(init.r_t_nis), std::log(init.delta),
                               std::log(init.gamma_dynes), std::log(init.t_n)};
  LmResult lmres = levenberg_marquardt(residuals, theta, m, lm);

  out.params.r_t_nis = std::exp(lmres.params[0]);
  out.params.delta = std::exp(lmres.params[1]);
  out.params.gamma_dynes = std::exp(lmres.params[2]);
  out.params.t_n = std::exp(lmres.params[3]);
  out.params.t_s = t_s;
  out.residual_rms = lmres.residual_rms * i_scale;
  out.iterations = lmres.iterations;
  out.converged = lmres.converged;
  out.accepted_costs = lmres.accepted_costs;

  // Covariance from the linear-space Jacobian at the solution. Transforming
  // the log-space covariance instead would understate the uncertainty of a
  // parameter that collapsed toward zero (the log Jacobian column dies with
  // it, the linear one does not).
  {
    std::vector<double> jac(m * 4, 0.0), rp(m), rm(m);
    const double p[4] = {out.params.r_t_nis, out.params.delta,
                         out.params.gamma_dynes, out.params.t_n};
    // gamma may collapse to ~0 in the fit; an absolute step floor keeps its
    // derivative (the current is linear in gamma) above the quadrature noise.
    const double h_floor[4] = {0.0, 0.0, 1e-6, 0.0};
    std::vector<double> r0(m);
    {
      std::vector<double> theta0 = {std::log(p[0]), std::log(p[1]),
                                    std::log(p[2]), std::log(p[3])};
      residuals(theta0, r0);
    }
    for (int j = 0; j < 4; ++j) {
      const double h = std::max(1e-6 * p[j], h_floor[j]);
      auto eval = [&](double pj, std::vector<double>& r) {
        std::vector<double> theta_j = {std::log(p[0]), std::log(p[1]),
                                       std::log(p[2]), std::log(p[3])};
        theta_j[static_cast<std::size_t>(j)] = std::log(pj);
        residuals(theta_j, r);
      };
      eval(p[j] + h, rp);
      if (p[j] - h > 0.0) {
        eval(p[j] - h, rm);
        for (std::size_t i = 0; i < m; ++i)
          jac[i * 4 + j] = (rp[i] - rm[i]) / (2.0 * h);
      } else {
        for (std::size_t i = 0; i < m; ++i)
          jac[i * 4 + j] = (rp[i] - r0[i]) / h;
      }
    }
    // Heteroscedasticity-consistent (sandwich) covariance: measured IV noise
    // is closer to multiplicative than uniform, and the plain
    // sigma^2 (J^T J)^-1 form underestimates the spread of the parameters
    // carried by the high-current points. The residual normalization cancels
    // between the residuals and the Jacobian, so this is in parameter units.
    std::vector<double> binv = lm_covariance(jac, m, 4, 1.0);  // (J^T J)^-1
    double mid[16] = {0.0};
    for (std::size_t i = 0; i < m; ++i) {
      const double w = r0[i] * r0[i];
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          mid[a * 4 + b] += jac[i * 4 + a] * jac[i * 4 + b] * w;
    }
    const double dof_scale =
        static_cast<double>(m) / static_cast<double>(m > 4 ? m - 4 : 1);
    double tmp[16] = {0.0};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int k = 0; k < 4; ++k)
          tmp[a * 4 + b] += binv[a * 4 + k] * mid[k * 4 + b];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += tmp[a * 4 + k] * binv[k * 4 + b];
        out.covariance[a * 4 + b] = acc * dof_scale;
      }
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        const double s = 0.5 * (out.covariance[a * 4 + b] + out.covariance[b * 4 + a]);
        out.covariance[a * 4 + b] = out.covariance[b * 4 + a] = s;
      }
  }

  // Subgap coverage check: without |v| < delta/e samples the Dynes parameter
  // rides on nothing but the fit's extrapolation.
  const double v_sub = out.params.delta / constants::e;
  bool has_subgap = false;
  for (double v : data.voltage) {
    if (std::fabs(v) < v_sub) {
      has_subgap = true;
      break;
    }
  }
  out.gamma_dynes_unbounded = !has_subgap;
  return out;
}

IvDataset load_iv_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open IV CSV: " + path);

  IvDataset data;
  data.meta = path;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;

  auto parse_double = [&](std::string_view field, double& value) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Trim leading whitespace.
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    std::string_view body(line.data() + start, line.size() - start);
    if (body[0] == '#') continue;
    if (!header_seen) {
      if (body != "voltage_V,current_A")
        throw ParseError(path + ": line " + std::to_string(lineno) +
                         ": expected header 'voltage_V,current_A'");
      header_seen = true;
      continue;
    }
    const std::size_t comma = body.find(',');
    if (comma == std::string_view::npos)
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": expected 'voltage,current'");
    double v = 0.0, i = 0.0;
    if (!parse_double(body.substr(0, comma), v) ||
        !parse_double(body.substr(comma + 1), i))
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": non-numeric field");
    data.voltage.push_back(v);
    data.current.push_back(i);
  }
  if (!header_seen) throw ParseError(path + ": missing header line");
  if (data.voltage.empty()) throw ParseError(path + ": no data rows");
  return data;
}

void save_iv_csv(const IvDataset& data, const std::string& path,
                 const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write IV CSV: " + path);
  for (const std::string& c : comments) out << "# " << c << "\n";
  out << "voltage_V,current_A\n";
  char line[80];
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g\n", data.voltage[i],
                  data.current[i]);
    out << line;
  }
}

std::string fit_result_json(const IvFitResult& result,
                            const std::string& generator_version,
                            const std::string& input_hash) {
  nlohmann::json j;
  j["r_t_nis_ohm"] = result.params.r_t_nis;
  j["delta_ev"] = result.params.delta_ev();
  j["gamma_dynes"] = result.params.gamma_dynes;
  j["t_n_k"] = result.params.t_n;
  nlohmann::json cov = nlohmann::json::array();
  for (int a = 0; a < 4; ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (int b = 0; b < 4; ++b) row.push_back(result.covariance[a * 4 + b]);
    cov.push_back(row);
  }
  j["covariance"] = cov;
  j["residual_rms_a"] = result.residual_rms;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["gamma_dynes_unbounded"] = result.gamma_dynes_unbounded;
  j["version"] = generator_version;
  j["config_hash"] = input_hash;
  return j.dump(2) + "\n";
}

void save_fit_json(const IvFitResult& result, const std::string& path,
                   const std::string& generator_version,
                   const std::string& input_hash) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write fit JSON: " + path);
  out << fit_result_json(result, generator_version, input_hash);
}

}  // namespace qcrsim
