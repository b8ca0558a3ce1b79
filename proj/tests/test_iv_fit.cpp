#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "qcrsim/constants.hpp"
#include "qcrsim/errors.hpp"
#include "qcrsim/iv_fit.hpp"

#include "json.hpp"

using namespace qcrsim;
using namespace qcrsim::testing;

namespace {

IvDataset synthesize(const JunctionParams& truth, int n_points, double v_span_frac,
                     double noise_frac, std::uint64_t seed) {
  IvDataset data;
  data.meta = "synthetic";
  const double vmax = v_span_frac * two_delta_over_e(truth);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < n_points; ++i) {
    const double v = -vmax + 2.0 * vmax * i / (n_points - 1);
    double current = model_sinis_current(v, truth);
    if (noise_frac > 0.0) current *= 1.0 + noise_frac * gauss(rng);
    data.voltage.push_back(v);
    data.current.push_back(current);
  }
  return data;
}

JunctionParams perturbed(const JunctionParams& truth, double factor) {
  JunctionParams init = truth;
  init.r_t_nis *= factor;
  init.delta *= factor;
  init.gamma_dynes *= factor;
  init.t_n *= factor;
  return init;
}

double param(const JunctionParams& jp, int i) {
  switch (i) {
    case 0: return jp.r_t_nis;
    case 1: return jp.delta;
    case 2: return jp.gamma_dynes;
    default: return jp.t_n;
  }
}

}  // namespace

TEST_CASE("sinis model") {
  JunctionParams warm = sample_junction(NAN);
  CHECK(model_sinis_current(0.0, warm) == 0.0);
  const double v = 1.7 * two_delta_over_e(warm);
  CHECK(model_sinis_current(v, warm) == nis_current(0.5 * v, warm));

  SUBCASE("half-bias composition, cold closed form") {
    JunctionParams cold = cold_junction();
    const double v2 = 2.0 * (10.0 * cold.delta / constants::e);
    CHECK(model_sinis_current(v2, cold) ==
          doctest::Approx(63.45e-9).epsilon(5e-3));
  }

  SUBCASE("current onset curvature peaks near 2 delta / e") {
    const double two_de = two_delta_over_e(warm);
    const double h = 2e-6;
    double best_v = 0.0, best_curv = 0.0;
    for (double v_scan = 0.5 * two_de; v_scan < 1.5 * two_de; v_scan += h) {
      const double c = std::fabs(model_sinis_current(v_scan + h, warm) -
                                 2.0 * model_sinis_current(v_scan, warm) +
                                 model_sinis_current(v_scan - h, warm)) / (h * h);
      if (c > best_curv) {
        best_curv = c;
        best_v = v_scan;
      }
    }
    const double window = 4.0 * constants::k_b * warm.t_n / constants::e;
    CHECK(std::fabs(best_v - two_de) < window);
  }
}

TEST_CASE("noiseless round trip") {
  JunctionParams truth = sample_junction(NAN);
  IvDataset data = synthesize(truth, 101, 3.0, 0.0, 1);
  IvFitResult res = fit_iv(data, perturbed(truth, 1.3));
  REQUIRE(res.converged);
  for (int i = 0; i < 4; ++i)
    CHECK(rel_diff(param(res.params, i), param(truth, i)) < 5e-3);
  CHECK(res.residual_rms < 1e-12);
  CHECK_FALSE(res.gamma_dynes_unbounded);

  SUBCASE("cost is nonincreasing across accepted steps") {
    for (std::size_t k = 1; k < res.accepted_costs.size(); ++k)
      CHECK(res.accepted_costs[k] <= res.accepted_costs[k - 1]);
  }

  SUBCASE("covariance is symmetric with nonnegative diagonal") {
    for (int a = 0; a < 4; ++a) {
      CHECK(res.covariance[a * 4 + a] >= 0.0);
      for (int b = 0; b < 4; ++b)
        CHECK(res.covariance[a * 4 + b] == res.covariance[b * 4 + a]);
    }
  }
}

TEST_CASE("noisy recovery within reported uncertainty") {
  JunctionParams truth = sample_junction(NAN);
  IvDataset data = synthesize(truth, 101, 3.0, 0.01, 42);
  IvFitResult res = fit_iv(data, perturbed(truth, 1.2));
  REQUIRE(res.converged);
  for (int i = 0; i < 4; ++i) {
    const double sigma = std::sqrt(res.covariance[i * 4 + i]);
    CHECK(std::fabs(param(res.params, i) - param(truth, i)) < 3.0 * sigma);
  }
}

TEST_CASE("uncertainties shrink with dataset size") {
  JunctionParams truth = sample_junction(NAN);
  IvDataset small = synthesize(truth, 101, 3.0, 0.01, 7);
  IvDataset large = synthesize(truth, 404, 3.0, 0.01, 7);
  IvFitResult rs = fit_iv(small, perturbed(truth, 1.1));
  IvFitResult rl = fit_iv(large, perturbed(truth, 1.1));
  REQUIRE(rs.converged);
  REQUIRE(rl.converged);
  const double ratio = std::sqrt(rs.covariance[0] / rl.covariance[0]);
  CHECK(ratio > 1.4);   // 2 +- 30%
  CHECK(ratio < 2.6);
}

TEST_CASE("degenerate all-zero dataset") {
  JunctionParams truth = sample_junction(NAN);
  IvDataset data;
  for (int i = 0; i < 20; ++i) {
    data.voltage.push_back(i * 1e-5);
    data.current.push_back(0.0);
  }
  IvFitResult res = fit_iv(data, truth);
  CHECK_FALSE(res.converged);
  CHECK_NOTHROW(res.params.validate());
}

TEST_CASE("gamma flagged unbounded without subgap coverage") {
  JunctionParams truth = sample_junction(NAN);
  IvDataset data;
  const double v_lo = 1.5 * truth.delta / constants::e;
  const double v_hi = 6.0 * truth.delta / constants::e;
  for (int i = 0; i < 40; ++i) {
    const double v = v_lo + (v_hi - v_lo) * i / 39.0;
    data.voltage.push_back(v);
    data.current.push_back(model_sinis_current(v, truth));
    data.voltage.push_back(-v);
    data.current.push_back(model_sinis_current(-v, truth));
  }
  IvFitResult res = fit_iv(data, truth);
  CHECK(res.gamma_dynes_unbounded);
}

TEST_CASE("identifiability across plausible parameter boxes") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) {
    return lo * std::exp(u01(rng) * std::log(hi / lo));
  };
  int recovered = 0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    JunctionParams truth;
    truth.r_t_nis = log_uniform(5e3, 200e3);
    truth.delta = constants::ev_to_joule(log_uniform(100e-6, 400e-6));
    truth.gamma_dynes = log_uniform(1e-6, 1e-2);
    truth.t_n = log_uniform(0.05, 0.5);
    IvDataset data = synthesize(truth, 101, 3.0, 0.0, 100 + trial);
    JunctionParams init = truth;
    init.r_t_nis *= std::exp((2.0 * u01(rng) - 1.0) * std::log(2.0));
    init.delta *= std::exp((2.0 * u01(rng) - 1.0) * std::log(2.0));
    init.gamma_dynes *= std::exp((2.0 * u01(rng) - 1.0) * std::log(2.0));
    init.t_n *= std::exp((2.0 * u01(rng) - 1.0) * std::log(2.0));
    IvFitResult res = fit_iv(data, init);
    bool ok = res.converged;
    for (int i = 0; i < 4 && ok; ++i)
      ok = rel_diff(param(res.params, i), param(truth, i)) < 5e-3;
    if (ok) ++recovered;
  }
  CHECK(recovered == trials);
}

TEST_CASE("default init heuristic is good enough to converge") {
  JunctionParams truth = sample_junction(NAN);
  IvDataset data = synthesize(truth, 121, 3.0, 0.0, 3);
  JunctionParams init = default_iv_init(data);
  CHECK_NOTHROW(init.validate());
  CHECK(rel_diff(init.r_t_nis, truth.r_t_nis) < 0.3);
  CHECK(rel_diff(init.delta, truth.delta) < 0.3);
  IvFitResult res = fit_iv(data, init);
  REQUIRE(res.converged);
  for (int i = 0; i < 4; ++i)
    CHECK(rel_diff(param(res.params, i), param(truth, i)) < 5e-3);
}

TEST_CASE("iv csv round trip and diagnostics") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "qcrsim_iv_csv";
  fs::create_directories(dir);

  SUBCASE("bit-exact round trip") {
    IvDataset data;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      data.voltage.push_back(u(rng) * 1e-3);
      data.current.push_back(u(rng) * 1e-8);
    }
    const std::string path = (dir / "roundtrip.csv").string();
    save_iv_csv(data, path, {"round trip fixture"});
    IvDataset back = load_iv_csv(path);
    REQUIRE(back.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      CHECK(back.voltage[i] == data.voltage[i]);
      CHECK(back.current[i] == data.current[i]);
    }
  }

  SUBCASE("header-only file is an empty-dataset error") {
    const std::string path = (dir / "empty.csv").string();
    FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("voltage_V,current_A\n", f);
    std::fclose(f);
    CHECK_THROWS_AS(load_iv_csv(path), ParseError);
  }

  SUBCASE("non-numeric row names the line") {
    const std::string path = (dir / "bad.csv").string();
    FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("voltage_V,current_A\n1e-4,2e-9\noops,3e-9\n", f);
    std::fclose(f);
    try {
      load_iv_csv(path);
      FAIL("expected ParseError");
    } catch (const ParseError& ex) {
      CHECK(std::string(ex.what()).find("line 3") != std::string::npos);
    }
  }

  SUBCASE("comment lines are ignored") {
    const std::string path = (dir / "comments.csv").string();
    FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("# provenance\nvoltage_V,current_A\n# mid comment\n1e-4,2e-9\n", f);
    std::fclose(f);
    IvDataset data = load_iv_csv(path);
    CHECK(data.size() == 1);
    CHECK(data.voltage[0] == 1e-4);
  }
}

TEST_CASE("fit json document") {
  JunctionParams truth = sample_junction(NAN);
  IvDataset data = synthesize(truth, 64, 3.0, 0.0, 9);
  IvFitResult res = fit_iv(data, perturbed(truth, 1.1));
  const std::string doc = fit_result_json(res, "0.0-test", "deadbeef");
  auto j = nlohmann::json::parse(doc);
  for (const char* key : {"r_t_nis_ohm", "delta_ev", "gamma_dynes", "t_n_k",
                          "covariance", "residual_rms_a", "converged",
                          "iterations", "gamma_dynes_unbounded"})
    CHECK(j.contains(key));
  CHECK(j["covariance"].size() == 4);
  CHECK(j["covariance"][0].size() == 4);
  CHECK(j["converged"].get<bool>() == res.converged);
  CHECK(j["r_t_nis_ohm"].get<double>() == res.params.r_t_nis);
}
