#pragma once

#include <array>
#include <string>
#include <vector>

#include "qcrsim/junction.hpp"

namespace qcrsim {

// Measured SINIS current-voltage samples.
struct IvDataset {
  std::vector<double> voltage;  // V across the full SINIS
  std::vector<double> current;  // A
  std::string meta;

  std::size_t size() const { return voltage.size(); }
  void validate() const;  // >= 8 points, finite, voltages not all equal
};

struct FitOptions {
  int max_iterations = 200;
  double cost_rel_tol = 1e-10;
  double quad_rel_tol = 1e-9;
  double fd_step = 1e-6;  // relative parameter step (flat in log-space)
};

// Parameter order everywhere: r_t_nis, delta, gamma_dynes, t_n.
struct IvFitResult {
  JunctionParams params;
  std::array<double, 16> covariance{};  // 4x4 row-major
  double residual_rms = 0.0;            // A
  int iterations = 0;
  bool converged = false;
  // Set when the dataset has no subgap points (|v| < delta/e): the Dynes
  // parameter is then unbounded above by the data and its reported value and
  // uncertainty should not be trusted.
  bool gamma_dynes_unbounded = false;
  std::vector<double> accepted_costs;
};

// Series SINIS with equal junctions: I(v) = nis_current(v/2).
double model_sinis_current(double v, const JunctionParams& jp,
                           double rel_tol = quad::default_rel_tol);

// Initial guess when the caller has none: R_T from the high-bias slope,
// delta from the maximum-curvature bias, gamma 1e-4, T_N 0.1 K.
JunctionParams default_iv_init(const IvDataset& data);

// Nonlinear least squares for {R_T, delta, gamma_D, T_N}, searched in
// log-space so every iterate satisfies the positivity invariants.
IvFitResult fit_iv(const IvDataset& data, const JunctionParams& init,
                   const FitOptions& opts = {});

// CSV with header voltage_V,current_A; '#' lines ignored; parse failures name
// the line. Empty data section is an error.
IvDataset load_iv_csv(const std::string& path);
void save_iv_csv(const IvDataset& data, const std::string& path,
                 const std::vector<std::string>& comments = {});

// JSON result document (keys r_t_nis_ohm, delta_ev, gamma_dynes, t_n_k,
// covariance, residual_rms_a, converged, iterations, ...).
std::string fit_result_json(const IvFitResult& result,
                            const std::string& generator_version,
                            const std::string& input_hash);
void save_fit_json(const IvFitResult& result, const std::string& path,
                   const std::string& generator_version,
                   const std::string& input_hash);

}  // namespace qcrsim
