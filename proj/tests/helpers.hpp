#pragma once

#include <cmath>

#include "qcrsim/constants.hpp"
#include "qcrsim/reset.hpp"

namespace qcrsim::testing {

// Canonical measured-sample parameter set used across the suites
// (matches data/table1.json).
inline JunctionParams sample_junction(double t_s_k = 0.01) {
  return JunctionParams::from_ev(34.5e3, 220e-6, 5e-4, 0.28, t_s_k);
}

// Near-ideal limit: negligible Dynes broadening and temperature.
inline JunctionParams cold_junction(double gamma = 1e-8, double t = 1e-3) {
  return JunctionParams::from_ev(34.5e3, 220e-6, gamma, t);
}

inline QcrQubitParams sample_qubit(double t_s_k = 0.01) {
  QcrQubitParams p;
  p.jp = sample_junction(t_s_k);
  p.c_c = 15e-15;
  p.c_g = 24.4e-15;
  p.c_nis = 3.5e-15;
  p.c_q = 97e-15;
  p.z_r = 179.0;
  p.f0 = 9.18e9;
  p.kappa = 1.0;
  return p;
}

inline CircuitParams sample_circuit() {
  CircuitParams cp;
  cp.c_bias_tee = 10e-9;
  cp.r_source = 50.0;
  cp.r_filter = 50.0;
  cp.c_filter = 10.6e-12;
  cp.c_nis = 3.5e-15;
  cp.c_island = 39.4e-15;
  cp.jp = sample_junction();
  return cp;
}

inline ResetConfig sample_reset() {
  ResetConfig rc;
  rc.p = sample_qubit();
  rc.p.kappa = calibrate_kappa(rc.p, 4.31e-6);
  rc.cp = sample_circuit();
  rc.intrinsic_t1 = 1.74e-6;
  rc.p0 = 1.0;
  rc.readout_delay = 400e-9;
  rc.amplitudes_frac = {0.57};
  rc.lengths = {80e-9};
  return rc;
}

inline double two_delta_over_e(const JunctionParams& jp) {
  return 2.0 * jp.delta / constants::e;
}

inline double rel_diff(double a, double b) {
  return std::fabs(a - b) / std::max(std::fabs(b), 1e-300);
}

}  // namespace qcrsim::testing
