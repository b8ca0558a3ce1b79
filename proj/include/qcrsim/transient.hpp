#pragma once

#include <array>
#include <string>
#include <vector>

#include "qcrsim/junction.hpp"
#include "qcrsim/rates.hpp"

namespace qcrsim {

// Bias network as seen by the SINIS: rapid-pulse source behind a series
// bias-tee capacitor with its line impedance shunting the combined node, the
// on-chip RC low-pass between that node and the SINIS top electrode, and the
// junction/island capacitances below it.
struct CircuitParams {
  double c_bias_tee = 10e-9;   // series bias-tee capacitance, F
  double r_source = 50.0;      // source/line impedance, Ohm
  double r_filter = 50.0;      // on-chip filter series resistance, Ohm
  double c_filter = 10.6e-12;  // on-chip filter shunt capacitance, F
  double c_nis = 3.5e-15;      // per-junction shunt capacitance, F
  double c_island = 0.0;       // island-to-ground capacitance incl. coupling path, F
  JunctionParams jp;

  double filter_cutoff_hz() const;
  void validate() const;
};

// Square control pulse with linear edges. amplitude in volts.
struct PulseSpec {
  double amplitude = 0.0;  // V
  double length = 0.0;     // s
  double start = 0.0;      // s
  double rise_time = 0.5e-9;  // s, linear ramp on both edges

  double source_voltage(double t) const;
  std::vector<double> breakpoints() const;
  void validate() const;
};

struct SolverStats {
  long steps = 0;
  long rejected = 0;
  long newton_iterations = 0;
};

// Node/junction waveforms on the solver's accepted time grid.
struct TransientTrace {
  std::vector<double> t;                       // s, strictly increasing
  std::vector<double> v_j1;                    // V, top junction drop v_b - v_i
  std::vector<double> v_j2;                    // V, bottom junction drop v_i
  std::vector<std::array<double, 3>> v_nodes;  // (v_a, v_b, v_i)
  SolverStats stats;

  std::size_t size() const { return t.size(); }
  // Index of the sample at time tq (must be a solver stop point).
  std::size_t index_at(double tq) const;
};

// Integrates the charge-balance equations for (bias-tee charge, v_b, v_i)
// driven by the pulse. Junctions are the full thermal/Dynes nis_current with
// quadrature-backed derivatives for the implicit solver.
TransientTrace simulate_transient(const PulseSpec& pulse, const CircuitParams& cp,
                                  double horizon, double rel_tol = 1e-6,
                                  long max_steps = 2000000);

// Per-sample qubit rates from the junction voltage pair, summed over both
// junctions. With v_j1 = v_j2 = v/2 this reproduces qubit_rates(v) exactly.
struct RateSeries {
  std::vector<double> t;
  std::vector<double> gamma10;
  std::vector<double> gamma01;
  std::vector<double> t1;
};

RateSeries instantaneous_t1(const TransientTrace& trace, const QcrQubitParams& p,
                            double rel_tol = quad::default_rel_tol);
RateSeries instantaneous_t1(const TransientTrace& trace,
                            const RateInterpolator& cache);

// Largest weighted defect of the trace against the charge-balance equations,
// reconstructed by midpoint differencing; an accepted trace stays below ~10
// in units of the solver tolerance.
double max_ode_defect(const TransientTrace& trace, const PulseSpec& pulse,
                      const CircuitParams& cp, double rel_tol);

// CSV t_s,v_j1_V,v_j2_V,gamma10_hz,gamma01_hz,t1_s at full precision.
std::string transient_csv(const TransientTrace& trace, const RateSeries& rates,
                          const std::vector<std::string>& comments = {});

}  // namespace qcrsim
