#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qcrsim/rates.hpp"
#include "qcrsim/transient.hpp"

namespace qcrsim {

// Full reset-protocol configuration: rate model, bias network, measured
// off-state lifetime, protocol timing, and the amplitude x length grid.
struct ResetConfig {
  QcrQubitParams p;
  CircuitParams cp;
  double intrinsic_t1 = 0.0;   // measured off-state lifetime, s
  double p0 = 1.0;             // initial excited-state probability
  double readout_delay = 0.0;  // s, drive-to-readout gap
  std::vector<double> amplitudes_frac;  // fractions of 2*delta/e
  std::vector<double> lengths;          // s
  double rise_time = 0.5e-9;            // s
  double pulse_start = 0.0;             // s
  double ode_rel_tol = 1e-6;
  long ode_max_steps = 2000000;
  bool use_rate_cache = true;  // sweep-only speedup, 0.1%-accurate

  double amplitude_volts(double frac) const;
  void validate() const;
};

struct PopulationTrace {
  std::vector<double> t;
  std::vector<double> p_e;
};

// Two-level population under a piecewise rate schedule:
//   dP/dt = -(g10 + g01 + extra_down) P + g01,
// advanced with exact integrating factors per schedule interval (rates held
// at interval midpoints). Unconditionally keeps P in [0, 1].
PopulationTrace propagate_population(const RateSeries& schedule,
                                     double extra_down_rate, double p0,
                                     double horizon);

// One pulse: waveform -> instantaneous rates -> population. The intrinsic
// extra down-rate is set so the zero-amplitude total lifetime equals
// intrinsic_t1 (clamped at >= 0).
struct ResetRecord {
  double amplitude_frac = 0.0;
  double length = 0.0;
  double p_end = 0.0;      // P_e at end of pulse
  double p_readout = 0.0;  // P_e at readout_delay
  PopulationTrace population;
  SolverStats solver_stats;
};

ResetRecord run_reset_protocol(const ResetConfig& cfg, double amplitude_frac,
                               double length,
                               const RateInterpolator* cache = nullptr);

// Offset-exponential least squares a + b exp(-t/t1).
struct ExpFit {
  double t1 = 0.0;
  double offset = 0.0;     // a
  double amplitude = 0.0;  // b
  double t1_stderr = 0.0;
  int iterations = 0;
};

ExpFit fit_exponential(const std::vector<double>& t, const std::vector<double>& p_e);

// Amplitude x length sweep. Cells are independent; failures are recorded
// per cell and flagged, never aborting the sweep.
struct SweepCell {
  double p_end = NAN;
  double p_readout = NAN;
  bool ok = false;
  std::string error;
};

struct AmplitudeFit {
  double amplitude_frac = 0.0;
  double t1_eff = NAN;
  double t1_stderr = NAN;
  bool ok = false;
};

struct ResetSweepResult {
  std::vector<double> amplitudes_frac;
  std::vector<double> lengths;
  std::vector<std::vector<SweepCell>> cells;  // [amplitude][length]
  bool partial = false;

  double min_p_e = NAN;
  double argmin_amplitude = NAN;
  double argmin_length = NAN;
  std::vector<AmplitudeFit> fits;
};

ResetSweepResult sweep_protocol(const ResetConfig& cfg);

// CSV amplitude_frac_2delta,length_s,p_e_end,p_e_readout plus the JSON
// summary {min_p_e, argmin, fits}.
std::string sweep_csv(const ResetSweepResult& sweep,
                      const std::vector<std::string>& comments = {});
std::string sweep_summary_json(const ResetSweepResult& sweep,
                               const std::string& generator_version,
                               const std::string& config_hash);

}  // namespace qcrsim
