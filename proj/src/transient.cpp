#include "qcrsim/transient.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "qcrsim/constants.hpp"
#include "qcrsim/errors.hpp"
#include "qcrsim/parallel.hpp"
#include "qcrsim/trbdf2.hpp"

namespace qcrsim {

double CircuitParams::filter_cutoff_hz() const {
  return 1.0 / (2.0 * constants::pi * r_filter * c_filter);
}

void CircuitParams::validate() const {
  jp.validate();
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::invalid_argument(std::string("CircuitParams: ") + name +
                                  " must be > 0");
  };
  positive(c_bias_tee, "c_bias_tee");
  positive(r_source, "r_source");
  positive(r_filter, "r_filter");
  positive(c_filter, "c_filter");
  positive(c_nis, "c_nis");
  positive(c_island, "c_island");
  const double fc = filter_cutoff_hz();
  if (fc < 0.1e9 || fc > 1.0e9)
    throw std::invalid_argument(
        "CircuitParams: filter cutoff outside [0.1, 1] GHz: " +
        std::to_string(fc * 1e-9) + " GHz");
}

double PulseSpec::source_voltage(double t) const {
  const double u = t - start;
  if (u <= 0.0 || u >= length + rise_time) return 0.0;
  if (rise_time <= 0.0) return u < length ? amplitude : 0.0;
  if (u < rise_time) return amplitude * (u / rise_time);
  if (u <= length) return amplitude;
  return amplitude * (1.0 - (u - length) / rise_time);
}

std::vector<double> PulseSpec::breakpoints() const {
  if (rise_time <= 0.0) return {start, start + length};
  return {start, start + rise_time, start + length, start + length + rise_time};
}

void PulseSpec::validate() const {
  if (!std::isfinite(amplitude))
    throw std::invalid_argument("PulseSpec: amplitude must be finite");
  if (!(length > 0.0)) throw std::invalid_argument("PulseSpec: length must be > 0");
  if (!(rise_time >= 0.0))
    throw std::invalid_argument("PulseSpec: rise_time must be >= 0");
  if (!std::isfinite(start) || start < 0.0)
    throw std::invalid_argument("PulseSpec: start must be >= 0");
}

std::size_t TransientTrace::index_at(double tq) const {
  const auto it = std::lower_bound(t.begin(), t.end(), tq);
  if (it != t.end()) {
    const std::size_t i = static_cast<std::size_t>(it - t.begin());
    const double tol = 1e-12 * std::max(1e-9, std::fabs(tq));
    if (std::fabs(t[i] - tq) <= tol) return i;
    if (i > 0 && std::fabs(t[i - 1] - tq) <= tol) return i - 1;
  }
  throw std::invalid_argument("TransientTrace: no sample at requested time");
}

namespace {

// State x = (v_ca, v_b, v_i): bias-tee capacitor voltage and the two junction
// node potentials; v_a = v_s(t) - v_ca.
struct CircuitOde {
  const PulseSpec* pulse;
  const CircuitParams* cp;
  double quad_tol;
  // Inverse of the 2x2 capacitance matrix of the (v_b, v_i) block.
  double mi00, mi01, mi10, mi11;

  void init() {
    const double cf = cp->c_filter, cn = cp->c_nis, ci = cp->c_island;
    const double m00 = cf + cn, m01 = -cn;
    const double m10 = cn, m11 = -(ci + 2.0 * cn);
    const double det = m00 * m11 - m01 * m10;
    mi00 = m11 / det;
    mi01 = -m01 / det;
    mi10 = -m10 / det;
    mi11 = m00 / det;
  }

  void rhs(double t, const double* x, double* f) const {
    const double vs = pulse->source_voltage(t);
    const double va = vs - x[0];
    const double i_rs = va / cp->r_source;
    const double i_rf = (va - x[1]) / cp->r_filter;
    const double i1 = nis_current(x[1] - x[2], cp->jp, quad_tol);
    const double i2 = nis_current(x[2], cp->jp, quad_tol);
    const double rb = i_rf - i1;
    const double ri = i2 - i1;
    f[0] = (i_rs + i_rf) / cp->c_bias_tee;
    f[1] = mi00 * rb + mi01 * ri;
    f[2] = mi10 * rb + mi11 * ri;
  }

  void jacobian(double t, const double* x, double* jac) const {
    (void)t;
    const double g1 = nis_conductance(x[1] - x[2], cp->jp, quad_tol);
    const double g2 = nis_conductance(x[2], cp->jp, quad_tol);
    const double inv_rf = 1.0 / cp->r_filter;
    // d(rb)/d(v_ca, v_b, v_i) and d(ri)/d(...)
    const double drb[3] = {-inv_rf, -inv_rf - g1, g1};
    const double dri[3] = {0.0, -g1, g2 + g1};
    jac[0 * 3 + 0] = (-1.0 / cp->r_source - inv_rf) / cp->c_bias_tee;
    jac[0 * 3 + 1] = -inv_rf / cp->c_bias_tee;
    jac[0 * 3 + 2] = 0.0;
    for (int c = 0; c < 3; ++c) {
      jac[1 * 3 + c] = mi00 * drb[c] + mi01 * dri[c];
      jac[2 * 3 + c] = mi10 * drb[c] + mi11 * dri[c];
    }
  }
};

}  // namespace

TransientTrace simulate_transient(const PulseSpec& pulse, const CircuitParams& cp,
                                  double horizon, double rel_tol, long max_steps) {
  pulse.validate();
  cp.validate();
  if (!(rel_tol > 0.0)) throw std::invalid_argument("simulate_transient: tol must be > 0");
  if (!(horizon >= pulse.start + pulse.length))
    throw std::invalid_argument(
        "simulate_transient: horizon shorter than the pulse");

  CircuitOde ode{&pulse, &cp, std::min(rel_tol * 1e-3, quad::default_rel_tol),
                 0, 0, 0, 0};
  ode.init();

  OdeSystem sys;
  sys.n = 3;
  sys.rhs = [&ode](double t, const double* y, double* f) { ode.rhs(t, y, f); };
  sys.jacobian = [&ode](double t, const double* y, double* j) {
    ode.jacobian(t, y, j);
  };

  OdeOptions opts;
  // The embedded estimate controls per-step error; the extra 1e-2 safety
  // keeps the accumulated error over the whole horizon inside rel_tol.
  const double safety = 1e-2;
  opts.rel_tol = rel_tol * safety;
  const double v_ref = std::max(std::fabs(pulse.amplitude), 1e-6);
  opts.abs_tol.assign(3, rel_tol * safety * 1e-2 * v_ref);
  opts.breakpoints = pulse.breakpoints();
  opts.max_steps = max_steps;
  opts.h_max = horizon / 8.0;
  opts.h_init = std::min(pulse.rise_time > 0.0 ? pulse.rise_time / 8.0 : 1e-11,
                         horizon * 1e-4);

  OdeSolution sol = integrate_trbdf2(sys, 0.0, horizon, {0.0, 0.0, 0.0}, opts);

  TransientTrace trace;
  const std::size_t n = sol.t.size();
  trace.t = std::move(sol.t);
  trace.v_j1.resize(n);
  trace.v_j2.resize(n);
  trace.v_nodes.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& x = sol.y[k];
    const double vs = pulse.source_voltage(trace.t[k]);
    trace.v_nodes[k] = {vs - x[0], x[1], x[2]};
    trace.v_j1[k] = x[1] - x[2];
    trace.v_j2[k] = x[2];
  }
  trace.stats.steps = sol.steps;
  trace.stats.rejected = sol.rejected;
  trace.stats.newton_iterations = sol.newton_iterations;
  return trace;
}

RateSeries instantaneous_t1(const TransientTrace& trace, const QcrQubitParams& p,
                            double rel_tol) {
  RateSeries out;
  const std::size_t n = trace.size();
  out.t = trace.t;
  out.gamma10.resize(n);
  out.gamma01.resize(n);
  out.t1.resize(n);
  parallel_for(n, [&](std::size_t k) {
    const auto [a10, a01] = junction_rates(trace.v_j1[k], p, rel_tol);
    const auto [b10, b01] = junction_rates(trace.v_j2[k], p, rel_tol);
    out.gamma10[k] = a10 + b10;
    out.gamma01[k] = a01 + b01;
    out.t1[k] = 1.0 / (out.gamma10[k] + out.gamma01[k]);
  });
  return out;
}

RateSeries instantaneous_t1(const TransientTrace& trace,
                            const RateInterpolator& cache) {
  RateSeries out;
  const std::size_t n = trace.size();
  out.t = trace.t;
  out.gamma10.resize(n);
  out.gamma01.resize(n);
  out.t1.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto [a10, a01] = cache.rates(trace.v_j1[k]);
    const auto [b10, b01] = cache.rates(trace.v_j2[k]);
    out.gamma10[k] = a10 + b10;
    out.gamma01[k] = a01 + b01;
    out.t1[k] = 1.0 / (out.gamma10[k] + out.gamma01[k]);
  }
  return out;
}

double max_ode_defect(const TransientTrace& trace, const PulseSpec& pulse,
                      const CircuitParams& cp, double rel_tol) {
  CircuitOde ode{&pulse, &cp, std::min(rel_tol * 1e-3, quad::default_rel_tol),
                 0, 0, 0, 0};
  ode.init();
  const double v_ref = std::max(std::fabs(pulse.amplitude), 1e-6);
  const double abs_tol = rel_tol * 1e-2 * v_ref;

  double worst = 0.0;
  double f[3];
  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    const double h = trace.t[k + 1] - trace.t[k];
    // State vector (v_ca, v_b, v_i) reconstructed from the stored nodes.
    const double vs0 = pulse.source_voltage(trace.t[k]);
    const double vs1 = pulse.source_voltage(trace.t[k + 1]);
    const double x0[3] = {vs0 - trace.v_nodes[k][0], trace.v_nodes[k][1],
                          trace.v_nodes[k][2]};
    const double x1[3] = {vs1 - trace.v_nodes[k + 1][0], trace.v_nodes[k + 1][1],
                          trace.v_nodes[k + 1][2]};
    const double tm = trace.t[k] + 0.5 * h;
    const double xm[3] = {0.5 * (x0[0] + x1[0]), 0.5 * (x0[1] + x1[1]),
                          0.5 * (x0[2] + x1[2])};
    ode.rhs(tm, xm, f);
    for (int c = 0; c < 3; ++c) {
      const double defect = (x1[c] - x0[c]) - h * f[c];
      const double scale =
          abs_tol + rel_tol * std::max(std::fabs(x0[c]), std::fabs(x1[c]));
      worst = std::max(worst, std::fabs(defect) / scale);
    }
  }
  return worst;
}

std::string transient_csv(const TransientTrace& trace, const RateSeries& rates,
                          const std::vector<std::string>& comments) {
  std::string out;
  for (const std::string& c : comments) {
    out += "# ";
    out += c;
    out += '\n';
  }
  out += "t_s,v_j1_V,v_j2_V,gamma10_hz,gamma01_hz,t1_s\n";
  char line[240];
  for (std::size_t k = 0; k < trace.size(); ++k) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  trace.t[k], trace.v_j1[k], trace.v_j2[k], rates.gamma10[k],
                  rates.gamma01[k], rates.t1[k]);
    out += line;
  }
  return out;
}

}  // namespace qcrsim
