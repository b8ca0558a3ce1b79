// Command-line front end: IV fitting, rate curves, pulse transients, and
// reset sweeps on a shared strict-JSON configuration.
//
// Exit codes: 0 success, 1 usage/IO error, 2 non-convergence, 3 partial sweep.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qcrsim/config.hpp"
#include "qcrsim/constants.hpp"
#include "qcrsim/errors.hpp"
#include "qcrsim/io.hpp"
#include "qcrsim/iv_fit.hpp"
#include "qcrsim/version.hpp"

namespace {

using namespace qcrsim;

JunctionParams init_from_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(path + ": " + ex.what());
  }
  for (const char* key : {"r_t_nis_ohm", "delta_ev", "gamma_dynes", "t_n_k"}) {
    if (!j.contains(key)) throw ParseError(path + ": missing key '" + key + "'");
  }
  JunctionParams jp = JunctionParams::from_ev(
      j.at("r_t_nis_ohm").get<double>(), j.at("delta_ev").get<double>(),
      j.at("gamma_dynes").get<double>(), j.at("t_n_k").get<double>(),
      j.contains("t_s_k") ? j.at("t_s_k").get<double>() : NAN);
  return jp;
}

int cmd_fit_iv(const std::string& input, const std::string& init_path,
               const std::string& output) {
  const std::string raw = read_text_file(input);
  const std::string hash = fnv1a64_hex(raw);
  IvDataset data = load_iv_csv(input);
  JunctionParams init =
      init_path.empty() ? default_iv_init(data) : init_from_json_file(init_path);
  IvFitResult result = fit_iv(data, init);
  save_fit_json(result, output, version, hash);
  if (!result.converged) {
    std::cerr << "fit-iv: no convergence after " << result.iterations
              << " iterations (residual rms " << result.residual_rms << " A)\n";
    return 2;
  }
  return 0;
}

int cmd_rates(const std::string& config_path, double vmin,
              std::optional<double> vmax, bool as_frac, int points,
              std::optional<double> calibrate_t1, const std::string& output) {
  const std::string raw = read_text_file(config_path);
  RunConfig cfg = RunConfig::from_json_text(raw, config_path);
  const double two_delta_e = 2.0 * cfg.junction.delta / constants::e;
  double lo = vmin;
  double hi = vmax ? *vmax : (as_frac ? 1.2 : 1.2 * two_delta_e);
  if (as_frac) {
    lo *= two_delta_e;
    hi *= two_delta_e;
  }
  if (!(hi > lo) || points < 2) {
    std::cerr << "rates: need vmax > vmin and points >= 2\n";
    return 1;
  }
  if (calibrate_t1) {
    cfg.calibrate_t1_off = *calibrate_t1;
  }
  cfg.apply_calibration();

  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    grid[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);

  RateTable table = t1_qcr_curve(grid, cfg.qubit, cfg.quad_rel_tol);
  write_text_file(output,
                  rate_table_csv(table, {provenance_line(fnv1a64_hex(raw))}));
  return 0;
}

int cmd_transient(const std::string& config_path, double amplitude, bool volts,
                  double length, double start, std::optional<double> rise,
                  double tail, std::optional<double> tol,
                  const std::string& output) {
  const std::string raw = read_text_file(config_path);
  RunConfig cfg = RunConfig::from_json_text(raw, config_path);
  cfg.apply_calibration();

  PulseSpec pulse;
  pulse.amplitude =
      volts ? amplitude : amplitude * 2.0 * cfg.junction.delta / constants::e;
  pulse.length = length;
  pulse.start = start;
  pulse.rise_time = rise ? *rise : cfg.reset.rise_time;
  const double horizon = pulse.start + pulse.length + tail;
  const double rel_tol = tol ? *tol : cfg.ode_rel_tol;

  TransientTrace trace =
      simulate_transient(pulse, cfg.circuit, horizon, rel_tol, cfg.ode_max_steps);
  RateSeries rates = instantaneous_t1(trace, cfg.qubit, cfg.quad_rel_tol);
  write_text_file(output,
                  transient_csv(trace, rates, {provenance_line(fnv1a64_hex(raw))}));
  return 0;
}

int cmd_reset_sweep(const std::string& config_path, const std::string& out_dir) {
  const std::string raw = read_text_file(config_path);
  RunConfig cfg = RunConfig::from_json_text(raw, config_path);
  cfg.apply_calibration();

  ResetSweepResult sweep = sweep_protocol(cfg.reset);

  std::filesystem::create_directories(out_dir);
  const std::string hash = fnv1a64_hex(raw);
  write_text_file(out_dir + "/sweep.csv", sweep_csv(sweep, {provenance_line(hash)}));
  write_text_file(out_dir + "/summary.json",
                  sweep_summary_json(sweep, version, hash));
  if (sweep.partial) {
    std::cerr << "reset-sweep: some cells failed; see summary.json\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and analysis toolkit for voltage-controlled "
               "qubit reset through NIS tunnel junctions"};
  app.set_version_flag("--version", std::string("qcrsim ") + qcrsim::version);
  app.require_subcommand(1);

  // fit-iv
  std::string fit_input, fit_init, fit_output;
  CLI::App* fit = app.add_subcommand("fit-iv", "Fit junction parameters to IV data");
  fit->add_option("--input", fit_input, "Input CSV (voltage_V,current_A)")->required();
  fit->add_option("--init", fit_init, "Initial-guess JSON (defaults to a heuristic)");
  fit->add_option("--output", fit_output, "Output JSON path")->required();

  // rates
  std::string rates_config, rates_output;
  double rates_vmin = 0.0;
  std::optional<double> rates_vmax;
  std::optional<double> rates_calibrate;
  bool rates_frac = false;
  int rates_points = 241;
  CLI::App* rates = app.add_subcommand("rates", "Rate/T1 curve versus control voltage");
  rates->add_option("--config", rates_config, "Run configuration JSON")->required();
  rates->add_option("--vmin", rates_vmin, "Lowest bias (V, or fraction with --frac)");
  rates->add_option("--vmax", rates_vmax, "Highest bias (default 1.2 x 2*delta/e)");
  rates->add_flag("--frac", rates_frac, "Interpret --vmin/--vmax as fractions of 2*delta/e");
  rates->add_option("--points", rates_points, "Grid size (>= 2)");
  rates->add_option("--calibrate-t1", rates_calibrate,
                    "Calibrate kappa so T1(0) equals this many seconds");
  rates->add_option("--output", rates_output, "Output CSV path")->required();

  // transient
  std::string tr_config, tr_output;
  double tr_amplitude = 0.0, tr_length = 0.0, tr_start = 0.0, tr_tail = 40e-9;
  std::optional<double> tr_rise, tr_tol;
  bool tr_volts = false;
  CLI::App* transient = app.add_subcommand("transient", "Pulse waveform at the junctions");
  transient->add_option("--config", tr_config, "Run configuration JSON")->required();
  transient->add_option("--amplitude", tr_amplitude,
                        "Pulse amplitude (fraction of 2*delta/e)")->required();
  transient->add_flag("--volts", tr_volts, "Interpret --amplitude as volts");
  transient->add_option("--length", tr_length, "Pulse length, s")->required();
  transient->add_option("--start", tr_start, "Pulse start, s");
  transient->add_option("--rise", tr_rise, "Edge ramp time, s");
  transient->add_option("--tail", tr_tail, "Extra simulated time after the pulse, s");
  transient->add_option("--tol", tr_tol, "Integrator relative tolerance");
  transient->add_option("--output", tr_output, "Output CSV path")->required();

  // reset-sweep
  std::string sw_config, sw_outdir;
  CLI::App* sweep = app.add_subcommand("reset-sweep", "Amplitude x length reset sweep");
  sweep->add_option("--config", sw_config, "Run configuration JSON")->required();
  sweep->add_option("--output-dir", sw_outdir, "Directory for sweep.csv/summary.json")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (fit->parsed()) return cmd_fit_iv(fit_input, fit_init, fit_output);
    if (rates->parsed())
      return cmd_rates(rates_config, rates_vmin, rates_vmax, rates_frac,
                       rates_points, rates_calibrate, rates_output);
    if (transient->parsed())
      return cmd_transient(tr_config, tr_amplitude, tr_volts, tr_length, tr_start,
                           tr_rise, tr_tail, tr_tol, tr_output);
    if (sweep->parsed()) return cmd_reset_sweep(sw_config, sw_outdir);
  } catch (const qcrsim::FitError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
