#pragma once

#include <cmath>

#include "qcrsim/quadrature.hpp"

namespace qcrsim {

// One NIS tunnel junction. Energies in joules, temperatures in kelvin.
// t_s is the superconductor electrode temperature; NaN means "same as t_n",
// which is the default convention (a DC fit yields one temperature).
struct JunctionParams {
  double r_t_nis = 0.0;      // tunneling resistance, Ohm
  double delta = 0.0;        // gap parameter, J
  double gamma_dynes = 0.0;  // dimensionless subgap broadening
  double t_n = 0.0;          // normal-metal electron temperature, K
  double t_s = NAN;          // superconductor temperature, K (NaN -> t_n)

  double t_s_eff() const { return std::isnan(t_s) ? t_n : t_s; }
  double delta_ev() const;

  void validate() const;  // throws std::invalid_argument
  static JunctionParams from_ev(double r_t_nis_ohm, double delta_ev,
                                double gamma_dynes, double t_n_k,
                                double t_s_k = NAN);
};

// Dynes-broadened BCS density of states, normalized to 1 far above the gap:
//   n_S(eps) = | Re[ (x + i*gamma) / sqrt((x + i*gamma)^2 - 1) ] |,  x = eps/delta.
// Even in eps, finite everywhere, minimum gamma/sqrt(1+gamma^2) deep in the gap.
double dynes_dos(double eps, const JunctionParams& jp);

// Fermi occupation 1/(1 + exp(eps/(k_B t))). Saturates cleanly for
// |eps|/(k_B t) far beyond 1e4 instead of overflowing.
double fermi(double eps, double t);

// Quasiparticle current through one NIS junction at voltage v:
//   I(v) = 1/(e R_T) * Int n_S(eps) [f_N(eps - e v) - f_S(eps)] deps.
// Odd in v by construction, asymptotically ohmic with slope 1/R_T.
double nis_current(double v, const JunctionParams& jp,
                   double rel_tol = quad::default_rel_tol);

// dI/dV of the same junction, via the analytic Fermi-derivative integrand.
double nis_conductance(double v, const JunctionParams& jp,
                       double rel_tol = quad::default_rel_tol);

// Normalized single-direction tunneling rate with total energy budget
// e_total (bias work plus photon energy):
//   F(E) = 1/(e^2 R_T) * Int n_S(eps) f_N(eps - E) [1 - f_S(eps)] deps.
// Nonnegative, nondecreasing in E, vanishes as E -> -inf.
double rate_f(double e_total, const JunctionParams& jp,
              double rel_tol = quad::default_rel_tol);

namespace detail {
// Integration cutoff in gap units: max(30, |E|/delta + 30 kT/delta); beyond it
// the integrand is below ~1e-13 of its peak.
double energy_cutoff(double e_scaled, double kt_scaled);
}  // namespace detail

}  // namespace qcrsim
