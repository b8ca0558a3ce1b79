#pragma once

namespace qcrsim::constants {

// 2019 SI exact defining values.
inline constexpr double e = 1.602176634e-19;    // elementary charge, C
inline constexpr double h = 6.62607015e-34;     // Planck constant, J s
inline constexpr double k_b = 1.380649e-23;     // Boltzmann constant, J/K

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double hbar = h / (2.0 * pi);  // J s
inline constexpr double r_k = h / (e * e);      // quantum resistance h/e^2, Ohm

// Interfaces accept energies in eV; everything internal is joules.
inline constexpr double joule_per_ev = e;

inline constexpr double ev_to_joule(double ev) { return ev * joule_per_ev; }
inline constexpr double joule_to_ev(double j) { return j / joule_per_ev; }

}  // namespace qcrsim::constants
