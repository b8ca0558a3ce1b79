#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "helpers.hpp"
#include "qcrsim/config.hpp"
#include "qcrsim/constants.hpp"
#include "qcrsim/errors.hpp"
#include "qcrsim/io.hpp"
#include "qcrsim/version.hpp"

using namespace qcrsim;
using namespace qcrsim::testing;

#ifndef QCRSIM_DATA_DIR
#define QCRSIM_DATA_DIR "."
#endif

TEST_CASE("shipped sample configuration") {
  RunConfig cfg = RunConfig::load(std::string(QCRSIM_DATA_DIR) + "/table1.json");

  CHECK(cfg.junction.r_t_nis == 34500.0);
  CHECK(rel_diff(cfg.junction.delta_ev(), 220e-6) < 1e-12);
  CHECK(cfg.junction.gamma_dynes == 5e-4);
  CHECK(cfg.junction.t_n == 0.28);
  CHECK(cfg.junction.t_s == 0.01);

  CHECK(cfg.qubit.c_c == 15e-15);
  CHECK(cfg.qubit.c_g == 24.4e-15);
  CHECK(cfg.qubit.c_nis == 3.5e-15);
  CHECK(cfg.qubit.c_q == 97e-15);
  CHECK(cfg.qubit.z_r == 179.0);
  CHECK(cfg.qubit.f0 == 9.18e9);

  CHECK(cfg.circuit.c_bias_tee == 10e-9);
  CHECK(cfg.circuit.r_source == 50.0);
  // 0.3 GHz low-pass
  CHECK(rel_diff(cfg.circuit.filter_cutoff_hz(), 0.3e9) < 0.01);
  CHECK(cfg.circuit.c_island == 39.4e-15);

  CHECK(cfg.reset.intrinsic_t1 == 1.74e-6);
  CHECK(cfg.reset.readout_delay == 400e-9);
  CHECK(cfg.reset.amplitudes_frac.size() == 3);
  CHECK(cfg.reset.lengths.front() == 2e-9);
  CHECK(cfg.reset.lengths.back() == 350e-9);

  SUBCASE("configured calibration pins the off-state lifetime") {
    cfg.apply_calibration();
    CHECK(cfg.qubit.kappa != 1.0);
    const auto [g10, g01] = qubit_rates(0.0, cfg.qubit);
    CHECK(rel_diff(1.0 / (g10 + g01), 4.31e-6) < 1e-9);
  }
}

namespace {

std::string minimal_config() {
  return R"({
    "junction": {"r_t_nis_ohm": 34500.0, "delta_ev": 220e-6,
                 "gamma_dynes": 5e-4, "t_n_k": 0.28},
    "qubit": {"c_c_f": 15e-15, "c_g_f": 24.4e-15, "c_nis_f": 3.5e-15,
              "c_q_f": 97e-15, "z_r_ohm": 179.0, "f0_hz": 9.18e9},
    "circuit": {"c_bias_tee_f": 10e-9, "r_source_ohm": 50.0,
                "r_filter_ohm": 50.0, "c_filter_f": 10.6e-12},
    "reset": {"intrinsic_t1_s": 1.74e-6, "p0": 1.0, "readout_delay_s": 400e-9,
              "amplitudes_frac_2delta": [0.57], "lengths_s": [80e-9]}
  })";
}

}  // namespace

TEST_CASE("strict schema") {
  CHECK_NOTHROW(RunConfig::from_json_text(minimal_config()));

  SUBCASE("defaults are derived") {
    RunConfig cfg = RunConfig::from_json_text(minimal_config());
    CHECK(std::isnan(cfg.junction.t_s));
    CHECK(cfg.circuit.c_island == doctest::Approx(39.4e-15).epsilon(1e-12));
    CHECK(cfg.circuit.c_nis == 3.5e-15);
    CHECK(cfg.qubit.kappa == 1.0);
    CHECK(cfg.quad_rel_tol == 1e-9);
    CHECK(cfg.ode_rel_tol == 1e-6);
  }

  SUBCASE("unknown keys are rejected with their path") {
    std::string text = minimal_config();
    text.insert(text.rfind('}'), R"(, "extra_block": 1)");
    try {
      RunConfig::from_json_text(text);
      FAIL("expected ConfigError");
    } catch (const ConfigError& ex) {
      CHECK(std::string(ex.what()).find("extra_block") != std::string::npos);
    }

    std::string nested = minimal_config();
    nested.insert(nested.find(R"("t_n_k": 0.28)") + 13, R"(, "oops": 2)");
    try {
      RunConfig::from_json_text(nested);
      FAIL("expected ConfigError");
    } catch (const ConfigError& ex) {
      CHECK(std::string(ex.what()).find("junction/oops") != std::string::npos);
    }
  }

  SUBCASE("missing keys are named") {
    std::string text = minimal_config();
    const auto pos = text.find(R"("gamma_dynes": 5e-4,)");
    text.erase(pos, std::string(R"("gamma_dynes": 5e-4,)").size());
    try {
      RunConfig::from_json_text(text);
      FAIL("expected ConfigError");
    } catch (const ConfigError& ex) {
      CHECK(std::string(ex.what()).find("gamma_dynes") != std::string::npos);
    }
  }

  SUBCASE("embedded invariants are enforced before computing") {
    std::string text = minimal_config();
    // Filter far outside the design band.
    const std::string from = R"("c_filter_f": 10.6e-12)";
    text.replace(text.find(from), from.size(), R"("c_filter_f": 10.6e-9)");
    CHECK_THROWS_AS(RunConfig::from_json_text(text), ConfigError);

    text = minimal_config();
    const std::string g = R"("gamma_dynes": 5e-4)";
    text.replace(text.find(g), g.size(), R"("gamma_dynes": 2.0)");
    CHECK_THROWS_AS(RunConfig::from_json_text(text), ConfigError);
  }

  SUBCASE("malformed JSON is a parse error") {
    CHECK_THROWS_AS(RunConfig::from_json_text("{not json"), ParseError);
  }
}

TEST_CASE("content hash and provenance") {
  CHECK(fnv1a64_hex("abc") == "e71fa2190541574b");
  CHECK(fnv1a64_hex("abc") != fnv1a64_hex("abd"));
  CHECK(fnv1a64_hex("").size() == 16);

  const std::string line = provenance_line("e71fa2190541574b");
  CHECK(line.find(version) != std::string::npos);
  CHECK(line.find("config_hash=e71fa2190541574b") != std::string::npos);
}
