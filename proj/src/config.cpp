#include "qcrsim/config.hpp"

#include <cmath>
#include <set>

#include "qcrsim/constants.hpp"
#include "qcrsim/errors.hpp"
#include "qcrsim/io.hpp"

#include "json.hpp"

namespace qcrsim {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key()))
      throw ConfigError("unknown key '" + path + "/" + it.key() + "'");
  }
}

double get_number(const json& obj, const std::string& key,
                  const std::string& path) {
  if (!obj.contains(key))
    throw ConfigError("missing key '" + path + "/" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number())
    throw ConfigError("key '" + path + "/" + key + "' must be a number");
  return v.get<double>();
}

double get_number_or(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<double>();
}

std::vector<double> get_array(const json& obj, const std::string& key,
                              const std::string& path) {
  if (!obj.contains(key))
    throw ConfigError("missing key '" + path + "/" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_array() || v.empty())
    throw ConfigError("key '" + path + "/" + key + "' must be a nonempty array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw ConfigError("key '" + path + "/" + key + "' must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text,
                                    const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& ex) {
    throw ParseError(origin + ": " + ex.what());
  }
  if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");

  reject_unknown(root,
                 {"junction", "qubit", "circuit", "reset", "tolerances", "seed",
                  "output_dir"},
                 "");

  RunConfig cfg;

  if (!root.contains("junction")) throw ConfigError("missing key '/junction'");
  {
    const json& j = root.at("junction");
    reject_unknown(j, {"r_t_nis_ohm", "delta_ev", "gamma_dynes", "t_n_k", "t_s_k"},
                   "junction");
    cfg.junction.r_t_nis = get_number(j, "r_t_nis_ohm", "junction");
    cfg.junction.delta = constants::ev_to_joule(get_number(j, "delta_ev", "junction"));
    cfg.junction.gamma_dynes = get_number(j, "gamma_dynes", "junction");
    cfg.junction.t_n = get_number(j, "t_n_k", "junction");
    cfg.junction.t_s = get_number_or(j, "t_s_k", NAN);
    try {
      cfg.junction.validate();
    } catch (const std::exception& ex) {
      throw ConfigError(std::string("junction: ") + ex.what());
    }
  }

  if (!root.contains("qubit")) throw ConfigError("missing key '/qubit'");
  {
    const json& j = root.at("qubit");
    reject_unknown(j,
                   {"c_c_f", "c_g_f", "c_nis_f", "c_q_f", "z_r_ohm", "f0_hz",
                    "kappa", "calibrate_t1_off_s"},
                   "qubit");
    cfg.qubit.jp = cfg.junction;
    cfg.qubit.c_c = get_number(j, "c_c_f", "qubit");
    cfg.qubit.c_g = get_number(j, "c_g_f", "qubit");
    cfg.qubit.c_nis = get_number(j, "c_nis_f", "qubit");
    cfg.qubit.c_q = get_number(j, "c_q_f", "qubit");
    cfg.qubit.z_r = get_number(j, "z_r_ohm", "qubit");
    cfg.qubit.f0 = get_number(j, "f0_hz", "qubit");
    cfg.qubit.kappa = get_number_or(j, "kappa", 1.0);
    cfg.calibrate_t1_off = get_number_or(j, "calibrate_t1_off_s", 0.0);
    try {
      cfg.qubit.validate();
    } catch (const std::exception& ex) {
      throw ConfigError(std::string("qubit: ") + ex.what());
    }
  }

  if (!root.contains("circuit")) throw ConfigError("missing key '/circuit'");
  {
    const json& j = root.at("circuit");
    reject_unknown(j,
                   {"c_bias_tee_f", "r_source_ohm", "r_filter_ohm", "c_filter_f",
                    "c_nis_f", "c_island_f"},
                   "circuit");
    cfg.circuit.jp = cfg.junction;
    cfg.circuit.c_bias_tee = get_number(j, "c_bias_tee_f", "circuit");
    cfg.circuit.r_source = get_number(j, "r_source_ohm", "circuit");
    cfg.circuit.r_filter = get_number(j, "r_filter_ohm", "circuit");
    cfg.circuit.c_filter = get_number(j, "c_filter_f", "circuit");
    cfg.circuit.c_nis = get_number_or(j, "c_nis_f", cfg.qubit.c_nis);
    // Island-to-ground default: island capacitance plus the coupler path,
    // with the qubit node grounded at these frequencies.
    cfg.circuit.c_island = get_number_or(j, "c_island_f", cfg.qubit.c_g + cfg.qubit.c_c);
    try {
      cfg.circuit.validate();
    } catch (const std::exception& ex) {
      throw ConfigError(std::string("circuit: ") + ex.what());
    }
  }

  if (root.contains("tolerances")) {
    const json& j = root.at("tolerances");
    reject_unknown(j, {"quad_rel", "ode_rel", "ode_max_steps"}, "tolerances");
    cfg.quad_rel_tol = get_number_or(j, "quad_rel", cfg.quad_rel_tol);
    cfg.ode_rel_tol = get_number_or(j, "ode_rel", cfg.ode_rel_tol);
    cfg.ode_max_steps =
        static_cast<long>(get_number_or(j, "ode_max_steps", 2000000.0));
    if (!(cfg.quad_rel_tol > 0.0) || !(cfg.ode_rel_tol > 0.0) ||
        cfg.ode_max_steps < 1)
      throw ConfigError("tolerances: values must be positive");
  }

  if (root.contains("seed")) {
    if (!root.at("seed").is_number_unsigned())
      throw ConfigError("key '/seed' must be a nonnegative integer");
    cfg.seed = root.at("seed").get<std::uint64_t>();
  }
  if (root.contains("output_dir")) {
    if (!root.at("output_dir").is_string())
      throw ConfigError("key '/output_dir' must be a string");
    cfg.output_dir = root.at("output_dir").get<std::string>();
  }

  if (!root.contains("reset")) throw ConfigError("missing key '/reset'");
  {
    const json& j = root.at("reset");
    reject_unknown(j,
                   {"intrinsic_t1_s", "p0", "readout_delay_s",
                    "amplitudes_frac_2delta", "lengths_s", "rise_time_s",
                    "pulse_start_s", "use_rate_cache"},
                   "reset");
    cfg.reset.p = cfg.qubit;
    cfg.reset.cp = cfg.circuit;
    cfg.reset.intrinsic_t1 = get_number(j, "intrinsic_t1_s", "reset");
    cfg.reset.p0 = get_number(j, "p0", "reset");
    cfg.reset.readout_delay = get_number(j, "readout_delay_s", "reset");
    cfg.reset.amplitudes_frac = get_array(j, "amplitudes_frac_2delta", "reset");
    cfg.reset.lengths = get_array(j, "lengths_s", "reset");
    cfg.reset.rise_time = get_number_or(j, "rise_time_s", 0.5e-9);
    cfg.reset.pulse_start = get_number_or(j, "pulse_start_s", 0.0);
    if (j.contains("use_rate_cache")) {
      if (!j.at("use_rate_cache").is_boolean())
        throw ConfigError("key 'reset/use_rate_cache' must be a boolean");
      cfg.reset.use_rate_cache = j.at("use_rate_cache").get<bool>();
    }
    cfg.reset.ode_rel_tol = cfg.ode_rel_tol;
    cfg.reset.ode_max_steps = cfg.ode_max_steps;
    try {
      cfg.reset.validate();
    } catch (const std::exception& ex) {
      throw ConfigError(std::string("reset: ") + ex.what());
    }
  }

  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  return from_json_text(read_text_file(path), path);
}

void RunConfig::apply_calibration() {
  if (calibrate_t1_off > 0.0) {
    qubit.kappa = calibrate_kappa(qubit, calibrate_t1_off, quad_rel_tol);
    reset.p = qubit;
  }
}

}  // namespace qcrsim
