#include "qcrsim/reset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "qcrsim/constants.hpp"
#include "qcrsim/errors.hpp"
#include "qcrsim/levmar.hpp"
#include "qcrsim/parallel.hpp"

#include "json.hpp"

namespace qcrsim {

double ResetConfig::amplitude_volts(double frac) const {
  return frac * 2.0 * p.jp.delta / constants::e;
}

void ResetConfig::validate() const {
  p.validate();
  cp.validate();
  if (!(intrinsic_t1 > 0.0))
    throw std::invalid_argument("ResetConfig: intrinsic_t1 must be > 0");
  if (!(p0 >= 0.0 && p0 <= 1.0))
    throw std::invalid_argument("ResetConfig: p0 must be in [0, 1]");
  if (!(readout_delay > 0.0))
    throw std::invalid_argument("ResetConfig: readout_delay must be > 0");
  if (amplitudes_frac.empty() || lengths.empty())
    throw std::invalid_argument("ResetConfig: empty sweep grid");
  for (double a : amplitudes_frac)
    if (!std::isfinite(a))
      throw std::invalid_argument("ResetConfig: non-finite amplitude");
  for (double l : lengths)
    if (!(l > 0.0 && pulse_start + l <= readout_delay))
      throw std::invalid_argument(
          "ResetConfig: lengths must lie in (0, readout_delay]");
  if (!(rise_time >= 0.0) || !(pulse_start >= 0.0))
    throw std::invalid_argument("ResetConfig: bad pulse timing");
  if (!(ode_rel_tol > 0.0))
    throw std::invalid_argument("ResetConfig: ode_rel_tol must be > 0");
}

PopulationTrace propagate_population(const RateSeries& schedule,
                                     double extra_down_rate, double p0,
                                     double horizon) {
  if (!(p0 >= 0.0 && p0 <= 1.0))
    throw std::invalid_argument("propagate_population: p0 must be in [0, 1]");
  if (!(extra_down_rate >= 0.0))
    throw std::invalid_argument("propagate_population: negative extra rate");
  if (horizon < 0.0)
    throw std::invalid_argument("propagate_population: negative horizon");

  PopulationTrace out;
  out.t.push_back(0.0);
  out.p_e.push_back(p0);
  if (horizon == 0.0) return out;

  const std::size_t n = schedule.t.size();
  if (n < 2 || schedule.t.front() > 0.0 || schedule.t.back() < horizon)
    throw std::invalid_argument(
        "propagate_population: schedule does not cover [0, horizon]");
  for (std::size_t k = 0; k < n; ++k) {
    if (k + 1 < n && !(schedule.t[k + 1] > schedule.t[k]))
      throw std::invalid_argument("propagate_population: schedule times not increasing");
    if (schedule.gamma10[k] < 0.0 || schedule.gamma01[k] < 0.0)
      throw std::invalid_argument("propagate_population: negative rate");
  }

  double p = p0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    double ta = schedule.t[k];
    double tb = schedule.t[k + 1];
    if (tb <= 0.0) continue;
    ta = std::max(ta, 0.0);
    tb = std::min(tb, horizon);
    if (tb <= ta) continue;

    // Rates held at the interval midpoint of the schedule's linear segment.
    const double g10 = 0.5 * (schedule.gamma10[k] + schedule.gamma10[k + 1]);
    const double g01 = 0.5 * (schedule.gamma01[k] + schedule.gamma01[k + 1]);
    const double g_tot = g10 + g01 + extra_down_rate;
    const double h = tb - ta;
    if (g_tot > 0.0) {
      const double p_ss = g01 / g_tot;
      p = p_ss + (p - p_ss) * std::exp(-g_tot * h);
    }
    out.t.push_back(tb);
    out.p_e.push_back(p);
    if (tb >= horizon) break;
  }
  if (out.t.back() < horizon) {
    // Schedule covered the horizon but the last node fell exactly on it.
    out.t.push_back(horizon);
    out.p_e.push_back(p);
  }
  return out;
}

namespace {

double population_at(const PopulationTrace& pop, double tq) {
  const auto it = std::lower_bound(pop.t.begin(), pop.t.end(), tq);
  if (it != pop.t.end()) {
    const std::size_t i = static_cast<std::size_t>(it - pop.t.begin());
    const double tol = 1e-12 * std::max(1e-9, std::fabs(tq));
    if (std::fabs(pop.t[i] - tq) <= tol) return pop.p_e[i];
    if (i > 0 && std::fabs(pop.t[i - 1] - tq) <= tol) return pop.p_e[i - 1];
  }
  throw std::invalid_argument("population trace has no sample at requested time");
}

}  // namespace

ResetRecord run_reset_protocol(const ResetConfig& cfg, double amplitude_frac,
                               double length, const RateInterpolator* cache) {
  if (!(length > 0.0 && cfg.pulse_start + length <= cfg.readout_delay))
    throw std::invalid_argument("run_reset_protocol: length outside (0, readout_delay]");

  PulseSpec pulse;
  pulse.amplitude = cfg.amplitude_volts(amplitude_frac);
  pulse.length = length;
  pulse.start = cfg.pulse_start;
  pulse.rise_time = cfg.rise_time;

  TransientTrace trace = simulate_transient(pulse, cfg.cp, cfg.readout_delay,
                                            cfg.ode_rel_tol, cfg.ode_max_steps);
  RateSeries rates = cache ? instantaneous_t1(trace, *cache)
                           : instantaneous_t1(trace, cfg.p);

  const auto [g10_off, g01_off] = qubit_rates(0.0, cfg.p);
  const double extra_down =
      std::max(0.0, 1.0 / cfg.intrinsic_t1 - (g10_off + g01_off));

  ResetRecord rec;
  rec.amplitude_frac = amplitude_frac;
  rec.length = length;
  rec.population =
      propagate_population(rates, extra_down, cfg.p0, cfg.readout_delay);
  rec.p_end = population_at(rec.population, cfg.pulse_start + length);
  rec.p_readout = rec.population.p_e.back();
  rec.solver_stats = trace.stats;
  return rec;
}

ExpFit fit_exponential(const std::vector<double>& t,
                       const std::vector<double>& p_e) {
  if (t.size() != p_e.size() || t.size() < 5)
    throw std::invalid_argument("fit_exponential: need >= 5 samples");
  for (double p : p_e)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("fit_exponential: P_e outside [0, 1]");

  const double span = t.back() - t.front();
  if (!(span > 0.0))
    throw std::invalid_argument("fit_exponential: degenerate time axis");

  // Initial guess; refuse visibly non-decaying data.
  const double a0 = p_e.back();
  const double b0 = p_e.front() - a0;
  if (b0 <= 1e-12) throw FitError("fit_exponential: curve does not decay");
  double tau0 = span / 3.0;
  const double target = a0 + b0 * 0.3678794411714423;  // 1/e of the drop
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (p_e[i] <= target) {
      tau0 = std::max(t[i] - t.front(), span * 1e-3);
      break;
    }
  }

  const std::size_t m = t.size();
  auto residuals = [&](const std::vector<double>& q, std::vector<double>& r) {
    const double a = q[0], b = q[1], tau = std::exp(q[2]);
    r.resize(m);
    for (std::size_t i = 0; i < m; ++i)
      r[i] = a + b * std::exp(-(t[i] - t.front()) / tau) - p_e[i];
  };

  LmOptions opts;
  LmResult res = levenberg_marquardt(residuals, {a0, b0, std::log(tau0)}, m, opts);
  if (!res.converged) throw FitError("fit_exponential: no convergence");

  ExpFit fit;
  fit.offset = res.params[0];
  fit.amplitude = res.params[1];
  fit.t1 = std::exp(res.params[2]);
  fit.iterations = res.iterations;
  const double var_log = res.covariance[2 * 3 + 2];
  fit.t1_stderr = fit.t1 * std::sqrt(std::max(var_log, 0.0));
  if (!(fit.t1 > 0.0) || fit.amplitude <= 0.0)
    throw FitError("fit_exponential: degenerate fit");
  return fit;
}

ResetSweepResult sweep_protocol(const ResetConfig& cfg) {
  cfg.validate();

  ResetSweepResult sweep;
  sweep.amplitudes_frac = cfg.amplitudes_frac;
  sweep.lengths = cfg.lengths;
  const std::size_t na = cfg.amplitudes_frac.size();
  const std::size_t nl = cfg.lengths.size();
  sweep.cells.assign(na, std::vector<SweepCell>(nl));

  // One shared rate cache spanning every junction voltage the sweep can
  // produce; built serially so worker count cannot matter.
  std::optional<RateInterpolator> cache;
  if (cfg.use_rate_cache) {
    double max_amp = 0.0;
    for (double a : cfg.amplitudes_frac)
      max_amp = std::max(max_amp, std::fabs(cfg.amplitude_volts(a)));
    if (max_amp > 0.0)
      cache.emplace(cfg.p, 1.05 * max_amp, 1025, quad::default_rel_tol);
  }

  parallel_for(na * nl, [&](std::size_t idx) {
    const std::size_t ia = idx / nl;
    const std::size_t il = idx % nl;
    SweepCell& cell = sweep.cells[ia][il];
    try {
      ResetRecord rec =
          run_reset_protocol(cfg, cfg.amplitudes_frac[ia], cfg.lengths[il],
                             cache ? &*cache : nullptr);
      cell.p_end = rec.p_end;
      cell.p_readout = rec.p_readout;
      cell.ok = true;
    } catch (const std::exception& ex) {
      cell.ok = false;
      cell.error = ex.what();
    }
  });

  // Summary: minimum over successful cells, verified against the matrix.
  for (std::size_t ia = 0; ia < na; ++ia) {
    for (std::size_t il = 0; il < nl; ++il) {
      const SweepCell& cell = sweep.cells[ia][il];
      if (!cell.ok) {
        sweep.partial = true;
        continue;
      }
      if (std::isnan(sweep.min_p_e) || cell.p_end < sweep.min_p_e) {
        sweep.min_p_e = cell.p_end;
        sweep.argmin_amplitude = sweep.amplitudes_frac[ia];
        sweep.argmin_length = sweep.lengths[il];
      }
    }
  }

  for (std::size_t ia = 0; ia < na; ++ia) {
    AmplitudeFit af;
    af.amplitude_frac = sweep.amplitudes_frac[ia];
    std::vector<double> tt, pp;
    for (std::size_t il = 0; il < nl; ++il) {
      if (sweep.cells[ia][il].ok) {
        tt.push_back(sweep.lengths[il]);
        pp.push_back(std::clamp(sweep.cells[ia][il].p_end, 0.0, 1.0));
      }
    }
    try {
      ExpFit fit = fit_exponential(tt, pp);
      af.t1_eff = fit.t1;
      af.t1_stderr = fit.t1_stderr;
      af.ok = true;
    } catch (const std::exception&) {
      af.ok = false;
    }
    sweep.fits.push_back(af);
  }
  return sweep;
}

std::string sweep_csv(const ResetSweepResult& sweep,
                      const std::vector<std::string>& comments) {
  std::string out;
  for (const std::string& c : comments) {
    out += "# ";
    out += c;
    out += '\n';
  }
  out += "amplitude_frac_2delta,length_s,p_e_end,p_e_readout\n";
  char line[160];
  for (std::size_t ia = 0; ia < sweep.amplitudes_frac.size(); ++ia) {
    for (std::size_t il = 0; il < sweep.lengths.size(); ++il) {
      const SweepCell& cell = sweep.cells[ia][il];
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n",
                    sweep.amplitudes_frac[ia], sweep.lengths[il], cell.p_end,
                    cell.p_readout);
      out += line;
    }
  }
  return out;
}

std::string sweep_summary_json(const ResetSweepResult& sweep,
                               const std::string& generator_version,
                               const std::string& config_hash) {
  nlohmann::json j;
  j["min_p_e"] = sweep.min_p_e;
  j["argmin"] = {{"amplitude", sweep.argmin_amplitude},
                 {"length", sweep.argmin_length}};
  nlohmann::json fits = nlohmann::json::array();
  for (const AmplitudeFit& af : sweep.fits) {
    nlohmann::json f;
    f["amplitude"] = af.amplitude_frac;
    if (af.ok) {
      f["t1_eff_s"] = af.t1_eff;
      f["stderr_s"] = af.t1_stderr;
    } else {
      f["t1_eff_s"] = nullptr;
      f["stderr_s"] = nullptr;
    }
    fits.push_back(f);
  }
  j["fits"] = fits;
  j["partial"] = sweep.partial;
  nlohmann::json errors = nlohmann::json::array();
  for (std::size_t ia = 0; ia < sweep.amplitudes_frac.size(); ++ia)
    for (std::size_t il = 0; il < sweep.lengths.size(); ++il)
      if (!sweep.cells[ia][il].ok)
        errors.push_back({{"amplitude", sweep.amplitudes_frac[ia]},
                          {"length", sweep.lengths[il]},
                          {"error", sweep.cells[ia][il].error}});
  j["failed_cells"] = errors;
  j["version"] = generator_version;
  j["config_hash"] = config_hash;
  return j.dump(2) + "\n";
}

}  // namespace qcrsim
