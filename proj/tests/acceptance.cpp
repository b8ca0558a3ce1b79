// Acceptance suite: runs every top-level requirement at its pinned tolerance
// and prints one PASS/FAIL line per criterion. Exit code = number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"
#include "qcrsim/config.hpp"
#include "qcrsim/constants.hpp"
#include "qcrsim/io.hpp"
#include "qcrsim/iv_fit.hpp"
#include "qcrsim/reset.hpp"

#ifndef QCRSIM_DATA_DIR
#define QCRSIM_DATA_DIR "."
#endif

using namespace qcrsim;
using namespace qcrsim::testing;

namespace {

int g_failures = 0;

double now_ms() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
}

void report(int idx, bool pass, const std::string& what, double elapsed_ms) {
  std::printf("[%s] %2d. %s  (%.1f ms)\n", pass ? "PASS" : "FAIL", idx,
              what.c_str(), elapsed_ms);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace

int main() {
  RunConfig cfg = RunConfig::load(std::string(QCRSIM_DATA_DIR) + "/table1.json");
  const QcrQubitParams base = cfg.qubit;  // kappa = 1
  const double two_de = 2.0 * base.jp.delta / constants::e;

  // 1. closed-form on/off estimate --------------------------------------
  {
    const double t0 = now_ms();
    const double ratio = onoff_ratio_estimate(base);
    const double dt = now_ms() - t0;
    const bool pass = std::fabs(ratio - 4814.0) <= 1.0 && dt < 1.0;
    report(1, pass,
           fmt("on/off closed form: %.3f (4814 +- 1, device estimate ~5000), runtime ok=%d",
               ratio, dt < 1.0),
           dt);
  }

  // 2. off-state calibration --------------------------------------------
  double kappa = 0.0;
  {
    const double t0 = now_ms();
    const auto [g10_raw, g01_raw] = qubit_rates(0.0, base);
    const double t1_raw = 1.0 / (g10_raw + g01_raw);
    const bool guard = t1_raw < 5.0 * 4.31e-6 && t1_raw > 4.31e-6 / 5.0;

    kappa = calibrate_kappa(base, 4.31e-6);
    QcrQubitParams cal = base;
    cal.kappa = kappa;
    RateTable curve = t1_qcr_curve(linspace(0.0, 1.2 * two_de, 241), cal);
    const bool pinned = rel_diff(curve.t1[0], 4.31e-6) < 1e-9;
    const double dt = now_ms() - t0;
    report(2, guard && pinned && dt < 5000.0,
           fmt("off-state calibration: T1(0)=4.31us rel err %.1e; kappa=1 model "
               "T1=%.2fus within x5; kappa=%.3f",
               rel_diff(curve.t1[0], 4.31e-6), t1_raw * 1e6, kappa),
           dt);
  }

  QcrQubitParams cal = base;
  cal.kappa = kappa;

  // 3. on-state prediction ------------------------------------------------
  double t1_min = 0.0, t1_zero = 0.0;
  {
    const double t0 = now_ms();
    RateTable scan = t1_qcr_curve(linspace(0.0, two_de, 241), cal);
    t1_min = *std::min_element(scan.t1.begin(), scan.t1.end());
    t1_zero = scan.t1.front();
    const double dt = now_ms() - t0;
    const bool pass = t1_min >= 3.5e-9 && t1_min <= 14e-9 && dt < 5000.0;
    report(3, pass,
           fmt("on-state prediction: min T1 over [0, 2delta/e] = %.2f ns "
               "(band [3.5, 14] ns, device estimate ~7 ns)",
               t1_min * 1e9),
           dt);
  }

  // 4. dynamic on/off ratio ------------------------------------------------
  {
    const double t0 = now_ms();
    const double ratio = t1_zero / t1_min;
    report(4, ratio >= 100.0,
           fmt("dynamic on/off: T1(0)/min T1 = %.0f (>= 100)", ratio),
           now_ms() - t0);
  }

  // 5. residual population ---------------------------------------------
  {
    const double t0 = now_ms();
    const double res = residual_population(cal, 0.0);
    QcrQubitParams doubled = cal;
    doubled.kappa = 2.0 * cal.kappa;
    const bool kappa_free = residual_population(doubled, 0.0) == res;
    const bool pass = res >= 0.02 && res <= 0.15 && kappa_free;
    report(5, pass,
           fmt("residual population at v=0: %.4f (band [0.02, 0.15], device estimate ~0.05); "
               "kappa-independent=%d",
               res, kappa_free),
           now_ms() - t0);
  }

  // 6. activated slope -----------------------------------------------------
  {
    const double t0 = now_ms();
    const double v_lo = 0.5 * two_de, v_hi = 0.8 * two_de;
    const auto [a10, a01] = qubit_rates(v_lo, cal);
    const auto [b10, b01] = qubit_rates(v_hi, cal);
    const double slope = std::log((b10 + b01) / (a10 + a01)) / (v_hi - v_lo);
    const double target = constants::e / (2.0 * constants::k_b * cal.jp.t_n);
    const bool pass = std::fabs(slope - target) <= 0.3 * target;
    report(6, pass,
           fmt("activated slope: %.3e /V vs e/(2 k T_N) = %.3e /V (+-30%%)",
               slope, target),
           now_ms() - t0);
  }

  // 7. IV round trips --------------------------------------------------
  {
    const double t0 = now_ms();
    JunctionParams truth = base.jp;
    truth.t_s = NAN;  // single-temperature fit convention

    auto synthesize = [&](double noise, std::uint64_t seed) {
      IvDataset data;
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> gauss(0.0, 1.0);
      const double vmax = 3.0 * two_de;
      for (int i = 0; i < 101; ++i) {
        const double v = -vmax + 2.0 * vmax * i / 100.0;
        double cur = model_sinis_current(v, truth);
        if (noise > 0.0) cur *= 1.0 + noise * gauss(rng);
        data.voltage.push_back(v);
        data.current.push_back(cur);
      }
      return data;
    };
    auto param = [](const JunctionParams& jp, int i) {
      return i == 0 ? jp.r_t_nis : i == 1 ? jp.delta : i == 2 ? jp.gamma_dynes : jp.t_n;
    };

    JunctionParams init = truth;
    init.r_t_nis *= 1.3;
    init.delta *= 1.3;
    init.gamma_dynes *= 1.3;
    init.t_n *= 1.3;
    IvFitResult clean = fit_iv(synthesize(0.0, 0), init);
    bool pass = clean.converged;
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
      worst = std::max(worst, rel_diff(param(clean.params, i), param(truth, i)));
    pass = pass && worst < 5e-3;

    int sigma_misses = 0;
    for (int trial = 0; trial < 20; ++trial) {
      IvFitResult res = fit_iv(synthesize(0.01, 1000 + trial), init);
      if (!res.converged) {
        ++sigma_misses;
        continue;
      }
      for (int i = 0; i < 4; ++i) {
        const double sigma = std::sqrt(res.covariance[i * 4 + i]);
        if (std::fabs(param(res.params, i) - param(truth, i)) > 3.0 * sigma)
          ++sigma_misses;
      }
    }
    const double dt = now_ms() - t0;
    pass = pass && sigma_misses == 0 && dt < 30000.0;
    report(7, pass,
           fmt("IV round trip: noiseless worst rel err %.2e (< 5e-3); "
               "20 noisy trials, 3-sigma misses: %d; runtime ok=%d",
               worst, sigma_misses, dt < 30000.0),
           dt);
  }

  // 8. transient oracles -----------------------------------------------
  {
    const double t0 = now_ms();
    CircuitParams cp = cfg.circuit;
    bool pass = true;
    std::string detail;

    {  // zero input -> exactly zero output
      PulseSpec ps;
      ps.amplitude = 0.0;
      ps.length = 40e-9;
      ps.start = 20e-9;
      TransientTrace tr = simulate_transient(ps, cp, 100e-9, 1e-6);
      for (std::size_t k = 0; k < tr.size(); ++k)
        if (tr.v_j1[k] != 0.0 || tr.v_j2[k] != 0.0) pass = false;
      detail += fmt("zero-io=%d", pass);
    }

    double tr_time = 0.0;
    {  // bias-tee droop of the delivered pulse
      PulseSpec ps;
      ps.amplitude = 0.8 * two_de;
      ps.length = 40e-9;
      ps.start = 20e-9;
      const double s0 = now_ms();
      TransientTrace tr = simulate_transient(ps, cp, 100e-9, 1e-6);
      tr_time = std::max(tr_time, now_ms() - s0);
      const std::size_t end_i = tr.index_at(ps.start + ps.length);
      double peak = 0.0;
      for (std::size_t k = 0; k <= end_i; ++k)
        peak = std::max(peak, tr.v_j1[k] + tr.v_j2[k]);
      const double droop = 1.0 - (tr.v_j1[end_i] + tr.v_j2[end_i]) / peak;
      const bool ok = droop > 0.067 && droop < 0.087;
      pass = pass && ok;
      detail += fmt(", droop=%.4f(band 0.077+-0.01)", droop);
    }

    {  // subgap small-signal plateau vs linearized circuit
      PulseSpec ps;
      ps.amplitude = 0.2 * two_de;
      ps.length = 40e-9;
      ps.start = 20e-9;
      const double s0 = now_ms();
      TransientTrace tr = simulate_transient(ps, cp, 80e-9, 1e-6);
      tr_time = std::max(tr_time, now_ms() - s0);
      std::size_t k = 0;
      while (k + 1 < tr.size() && tr.t[k + 1] <= ps.start + 4e-9) ++k;
      const double div1 = (cp.c_island + cp.c_nis) / (cp.c_island + 2.0 * cp.c_nis);
      LinearCircuitOracle oracle;
      oracle.cp = cp;
      // secant resistances at the plateau operating points
      const double v1 = ps.amplitude * div1;
      const double v2 = ps.amplitude * (1.0 - div1);
      oracle.r_j1 = v1 / nis_current(v1, cp.jp);
      oracle.r_j2 = v2 / nis_current(v2, cp.jp);
      const auto vj = oracle.junction_voltages(ps, tr.t[k]);
      const double err1 = rel_diff(tr.v_j1[k], vj[0]);
      const double err2 = std::fabs(tr.v_j2[k] - vj[1]) / (vj[0] + vj[1]);
      const bool ok = err1 < 0.02 && err2 < 0.02;
      pass = pass && ok;
      detail += fmt(", subgap-lin err=(%.4f, %.4f)(<0.02)", err1, err2);
    }

    {  // constant symmetric trace vs static curve
      const double v = 0.7 * two_de;
      TransientTrace tr;
      tr.t = {0.0, 1e-9, 2e-9};
      tr.v_j1.assign(3, 0.5 * v);
      tr.v_j2.assign(3, 0.5 * v);
      tr.v_nodes.assign(3, {v, v, 0.5 * v});
      RateSeries rs = instantaneous_t1(tr, cal);
      RateTable ref = t1_qcr_curve({v}, cal);
      const double err = rel_diff(rs.t1[0], ref.t1[0]);
      pass = pass && err < 1e-9;
      detail += fmt(", const-v err=%.1e(<1e-9)", err);
    }

    pass = pass && tr_time < 10000.0;
    report(8, pass, "transient oracles: " + detail, now_ms() - t0);
  }

  // 9. population propagation -------------------------------------------
  {
    const double t0 = now_ms();
    const double g10 = 1e8, g01 = 1e7, g_int = 2e5;
    RateSeries s;
    for (int i = 0; i < 9; ++i) {
      s.t.push_back(50e-9 * i / 8.0);
      s.gamma10.push_back(g10);
      s.gamma01.push_back(g01);
      s.t1.push_back(1.0 / (g10 + g01));
    }
    const double horizon = 4.0 / (g10 + g01 + g_int);
    PopulationTrace tr = propagate_population(s, g_int, 1.0, horizon);
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.t.size(); ++k)
      worst = std::max(worst,
                       rel_diff(tr.p_e[k], oracle_two_level(1.0, g10, g01, g_int, tr.t[k])));

    bool bounded = true;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
      RateSeries rs;
      double t = 0.0;
      const int n = 3 + static_cast<int>(u01(rng) * 10);
      for (int i = 0; i < n; ++i) {
        rs.t.push_back(t);
        t += 1e-10 * std::exp(6.0 * u01(rng));
        rs.gamma10.push_back(std::exp(23.0 * u01(rng)));
        rs.gamma01.push_back(std::exp(23.0 * u01(rng)));
        rs.t1.push_back(0.0);
      }
      PopulationTrace p = propagate_population(rs, std::exp(10.0 * u01(rng)),
                                               u01(rng), rs.t.back());
      for (double pe : p.p_e)
        if (!(pe >= 0.0 && pe <= 1.0)) bounded = false;
    }
    const bool pass = worst < 1e-9 && bounded;
    report(9, pass,
           fmt("population propagation: closed-form worst rel err %.1e (<1e-9); "
               "bounds held over 1000 random schedules=%d",
               worst, bounded),
           now_ms() - t0);
  }

  // 10. end-to-end reset benchmark ---------------------------------------
  {
    const double t0 = now_ms();
    ResetConfig rc = cfg.reset;
    rc.p = cal;
    ResetRecord rec = run_reset_protocol(rc, 0.57, 80e-9);
    const bool pass = rec.p_end <= 0.10;
    // Context: the model's own best cell over the standard amplitudes.
    ResetRecord best = run_reset_protocol(rc, 0.8, 80e-9);
    report(10, pass,
           fmt("end-to-end reset at (0.57 x 2delta/e, 80 ns): P_e = %.4f "
               "(<= 0.10 required; experiment 0.03 +- 0.01). Model optimum is "
               "displaced: P_e(0.8 x 2delta/e, 80 ns) = %.4f",
               rec.p_end, best.p_end),
           now_ms() - t0);
  }

  // 11. determinism ----------------------------------------------------
  {
    const double t0 = now_ms();
    const auto grid = linspace(0.0, 1.2 * two_de, 61);
    const std::string csv_a = rate_table_csv(t1_qcr_curve(grid, cal));
    const std::string csv_b = rate_table_csv(t1_qcr_curve(grid, cal));

    ResetConfig rc = cfg.reset;
    rc.p = cal;
    rc.amplitudes_frac = {0.57, 0.8};
    rc.lengths = {20e-9, 80e-9};
    setenv("QCRSIM_THREADS", "1", 1);
    const std::string sweep_a = sweep_csv(sweep_protocol(rc));
    setenv("QCRSIM_THREADS", "2", 1);
    const std::string sweep_b = sweep_csv(sweep_protocol(rc));
    unsetenv("QCRSIM_THREADS");
    const bool pass = csv_a == csv_b && sweep_a == sweep_b;
    report(11, pass,
           fmt("determinism: rate curve bytes identical=%d; sweep bytes "
               "identical across 1 vs 2 workers=%d",
               csv_a == csv_b, sweep_a == sweep_b),
           now_ms() - t0);
  }

  std::printf("%d/11 criteria passed\n", 11 - g_failures);
  if (g_failures > 0)
    std::printf("the simplified two-level model is expected to miss the "
                "fixed-amplitude reset benchmark; see README\n");
  return g_failures;
}
