#pragma once

#include <cstdint>
#include <string>

#include "qcrsim/reset.hpp"

namespace qcrsim {

// Strict JSON run configuration: every embedded type is validated before any
// computation and unknown keys are rejected with their full path.
struct RunConfig {
  JunctionParams junction;
  QcrQubitParams qubit;
  CircuitParams circuit;
  ResetConfig reset;
  double quad_rel_tol = 1e-9;
  double ode_rel_tol = 1e-6;
  long ode_max_steps = 2000000;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  double calibrate_t1_off = 0.0;  // seconds; 0 -> kappa taken as configured

  static RunConfig from_json_text(const std::string& text,
                                  const std::string& origin = "<config>");
  static RunConfig load(const std::string& path);

  // Applies the configured kappa calibration target, if any.
  void apply_calibration();
};

}  // namespace qcrsim
