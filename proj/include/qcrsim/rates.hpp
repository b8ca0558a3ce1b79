#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qcrsim/junction.hpp"

namespace qcrsim {

// QCR + qubit parameter set for the transition-rate model.
//
// The qubit couples to the normal-metal island through the capacitive
// fraction alpha = C_c / (C_c + C_g + 2 C_NIS); the dimensionless coupling is
// rho = pi alpha^2 Z_r / R_K. kappa is a calibration scalar absorbing the
// absolute-rate convention; every shipped ratio/shape result is kappa-free.
struct QcrQubitParams {
  JunctionParams jp;
  double c_c = 0.0;    // QCR-qubit coupling capacitance, F
  double c_g = 0.0;    // island-to-ground capacitance, F
  double c_nis = 0.0;  // single NIS junction capacitance, F
  double c_q = 0.0;    // qubit capacitance, F
  double z_r = 0.0;    // qubit characteristic impedance, Ohm
  double f0 = 0.0;     // qubit frequency, Hz
  double kappa = 1.0;  // rate-calibration scalar

  double alpha() const { return c_c / (c_c + c_g + 2.0 * c_nis); }
  double coupling_rho() const;
  double e_qubit() const;  // h f0, J

  void validate() const;
};

// Rates versus control voltage over a grid.
struct RateTable {
  std::vector<double> v_qcr;    // V
  std::vector<double> gamma10;  // 1/s
  std::vector<double> gamma01;  // 1/s
  std::vector<double> t1;       // s, 1/(gamma10+gamma01)
};

// Rates contributed by a single junction biased at v_j:
//   g10 = kappa rho [F(E_q + e v_j) + F(E_q - e v_j)]
//   g01 = kappa rho [F(-E_q + e v_j) + F(-E_q - e v_j)]
// Even in v_j.
std::pair<double, double> junction_rates(double v_j, const QcrQubitParams& p,
                                         double rel_tol = quad::default_rel_tol);

// Total qubit relaxation/excitation rates at SINIS bias v_qcr, with the
// symmetric split v_j = v_qcr / 2 on each junction.
std::pair<double, double> qubit_rates(double v_qcr, const QcrQubitParams& p,
                                      double rel_tol = quad::default_rel_tol);

// T1^QCR(V) curve over a voltage grid (sorted internally; may be unsorted).
RateTable t1_qcr_curve(std::vector<double> v_grid, const QcrQubitParams& p,
                       double rel_tol = quad::default_rel_tol);

// Steady-state excited-state probability Gamma01/(Gamma01+Gamma10) at bias v.
// Independent of kappa. Throws FitError when both rates vanish.
double residual_population(const QcrQubitParams& p, double v,
                           double rel_tol = quad::default_rel_tol);

// Closed-form static on/off ratio estimate sqrt(delta / (h f0 gamma^2)).
// Uses only the gap, qubit frequency and Dynes parameter.
double onoff_ratio_estimate(const QcrQubitParams& p);

// kappa such that 1/(Gamma10(0)+Gamma01(0)) equals target_t1_off. Rates are
// linear in kappa, so this is closed-form; p itself is not modified.
double calibrate_kappa(const QcrQubitParams& p, double target_t1_off,
                       double rel_tol = quad::default_rel_tol);

// CSV serialization: header v_qcr_V,gamma10_hz,gamma01_hz,t1_s, one row per
// grid point, 17 significant digits. Lines in `comments` are emitted first,
// each prefixed with "# ".
std::string rate_table_csv(const RateTable& table,
                           const std::vector<std::string>& comments = {});

// Monotone cubic interpolation of the per-junction rate pair on |v_j|, for
// hot loops over long traces. eval() falls back to direct quadrature outside
// the built range.
class RateInterpolator {
 public:
  RateInterpolator(const QcrQubitParams& p, double v_abs_max, int n_points = 513,
                   double rel_tol = quad::default_rel_tol);

  std::pair<double, double> rates(double v_j) const;
  double v_abs_max() const { return v_max_; }

 private:
  QcrQubitParams p_;
  double rel_tol_;
  double v_max_;
  std::vector<double> v_;
  std::vector<double> log10_, log01_;  // log-rates
  std::vector<double> d10_, d01_;      // pchip slopes
};

}  // namespace qcrsim
