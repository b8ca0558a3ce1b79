#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qcrsim/config.hpp"
#include "qcrsim/constants.hpp"
#include "qcrsim/errors.hpp"
#include "qcrsim/io.hpp"
#include "qcrsim/iv_fit.hpp"
#include "qcrsim/version.hpp"

namespace py = pybind11;
using namespace qcrsim;

PYBIND11_MODULE(_qcrsim, m) {
  m.doc() = "NIS-junction refrigerator simulator: junction physics, qubit "
            "rates, IV fitting, pulse transients and reset dynamics";

  py::register_exception<IntegrationError>(m, "IntegrationError");
  py::register_exception<SolverError>(m, "SolverError");
  py::register_exception<FitError>(m, "FitError");
  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<ParseError>(m, "ParseError");

  py::class_<JunctionParams>(m, "JunctionParams")
      .def(py::init<>())
      .def_static("from_ev", &JunctionParams::from_ev, py::arg("r_t_nis_ohm"),
                  py::arg("delta_ev"), py::arg("gamma_dynes"), py::arg("t_n_k"),
                  py::arg("t_s_k") = NAN)
      .def_readwrite("r_t_nis", &JunctionParams::r_t_nis)
      .def_readwrite("delta", &JunctionParams::delta)
      .def_readwrite("gamma_dynes", &JunctionParams::gamma_dynes)
      .def_readwrite("t_n", &JunctionParams::t_n)
      .def_readwrite("t_s", &JunctionParams::t_s)
      .def("delta_ev", &JunctionParams::delta_ev)
      .def("validate", &JunctionParams::validate);

  py::class_<QcrQubitParams>(m, "QcrQubitParams")
      .def(py::init<>())
      .def_readwrite("jp", &QcrQubitParams::jp)
      .def_readwrite("c_c", &QcrQubitParams::c_c)
      .def_readwrite("c_g", &QcrQubitParams::c_g)
      .def_readwrite("c_nis", &QcrQubitParams::c_nis)
      .def_readwrite("c_q", &QcrQubitParams::c_q)
      .def_readwrite("z_r", &QcrQubitParams::z_r)
      .def_readwrite("f0", &QcrQubitParams::f0)
      .def_readwrite("kappa", &QcrQubitParams::kappa)
      .def("alpha", &QcrQubitParams::alpha)
      .def("validate", &QcrQubitParams::validate);

  py::class_<CircuitParams>(m, "CircuitParams")
      .def(py::init<>())
      .def_readwrite("c_bias_tee", &CircuitParams::c_bias_tee)
      .def_readwrite("r_source", &CircuitParams::r_source)
      .def_readwrite("r_filter", &CircuitParams::r_filter)
      .def_readwrite("c_filter", &CircuitParams::c_filter)
      .def_readwrite("c_nis", &CircuitParams::c_nis)
      .def_readwrite("c_island", &CircuitParams::c_island)
      .def_readwrite("jp", &CircuitParams::jp)
      .def("filter_cutoff_hz", &CircuitParams::filter_cutoff_hz);

  py::class_<PulseSpec>(m, "PulseSpec")
      .def(py::init<>())
      .def_readwrite("amplitude", &PulseSpec::amplitude)
      .def_readwrite("length", &PulseSpec::length)
      .def_readwrite("start", &PulseSpec::start)
      .def_readwrite("rise_time", &PulseSpec::rise_time)
      .def("source_voltage", &PulseSpec::source_voltage);

  py::class_<RateTable>(m, "RateTable")
      .def_readonly("v_qcr", &RateTable::v_qcr)
      .def_readonly("gamma10", &RateTable::gamma10)
      .def_readonly("gamma01", &RateTable::gamma01)
      .def_readonly("t1", &RateTable::t1);

  py::class_<TransientTrace>(m, "TransientTrace")
      .def_readonly("t", &TransientTrace::t)
      .def_readonly("v_j1", &TransientTrace::v_j1)
      .def_readonly("v_j2", &TransientTrace::v_j2);

  py::class_<RateSeries>(m, "RateSeries")
      .def_readonly("t", &RateSeries::t)
      .def_readonly("gamma10", &RateSeries::gamma10)
      .def_readonly("gamma01", &RateSeries::gamma01)
      .def_readonly("t1", &RateSeries::t1);

  py::class_<PopulationTrace>(m, "PopulationTrace")
      .def_readonly("t", &PopulationTrace::t)
      .def_readonly("p_e", &PopulationTrace::p_e);

  py::class_<IvDataset>(m, "IvDataset")
      .def(py::init<>())
      .def_readwrite("voltage", &IvDataset::voltage)
      .def_readwrite("current", &IvDataset::current)
      .def_readwrite("meta", &IvDataset::meta);

  py::class_<FitOptions>(m, "FitOptions").def(py::init<>());

  py::class_<IvFitResult>(m, "IvFitResult")
      .def_readonly("params", &IvFitResult::params)
      .def_readonly("residual_rms", &IvFitResult::residual_rms)
      .def_readonly("iterations", &IvFitResult::iterations)
      .def_readonly("converged", &IvFitResult::converged)
      .def_readonly("gamma_dynes_unbounded", &IvFitResult::gamma_dynes_unbounded)
      .def_property_readonly("covariance", [](const IvFitResult& r) {
        return std::vector<double>(r.covariance.begin(), r.covariance.end());
      });

  py::class_<ResetRecord>(m, "ResetRecord")
      .def_readonly("amplitude_frac", &ResetRecord::amplitude_frac)
      .def_readonly("length", &ResetRecord::length)
      .def_readonly("p_end", &ResetRecord::p_end)
      .def_readonly("p_readout", &ResetRecord::p_readout)
      .def_readonly("population", &ResetRecord::population);

  py::class_<RunConfig>(m, "RunConfig")
      .def_static("load", &RunConfig::load)
      .def_static("from_json_text", &RunConfig::from_json_text, py::arg("text"),
                  py::arg("origin") = "<config>")
      .def("apply_calibration", &RunConfig::apply_calibration)
      .def_readwrite("junction", &RunConfig::junction)
      .def_readwrite("qubit", &RunConfig::qubit)
      .def_readwrite("circuit", &RunConfig::circuit)
      .def_readonly("quad_rel_tol", &RunConfig::quad_rel_tol)
      .def_readonly("ode_rel_tol", &RunConfig::ode_rel_tol);

  m.def("dynes_dos", &dynes_dos, py::arg("eps"), py::arg("jp"));
  m.def("fermi", &fermi, py::arg("eps"), py::arg("t"));
  m.def("nis_current", &nis_current, py::arg("v"), py::arg("jp"),
        py::arg("rel_tol") = quad::default_rel_tol);
  m.def("nis_conductance", &nis_conductance, py::arg("v"), py::arg("jp"),
        py::arg("rel_tol") = quad::default_rel_tol);
  m.def("rate_f", &rate_f, py::arg("e_total"), py::arg("jp"),
        py::arg("rel_tol") = quad::default_rel_tol);

  m.def("qubit_rates", &qubit_rates, py::arg("v_qcr"), py::arg("p"),
        py::arg("rel_tol") = quad::default_rel_tol);
  m.def("t1_qcr_curve", &t1_qcr_curve, py::arg("v_grid"), py::arg("p"),
        py::arg("rel_tol") = quad::default_rel_tol);
  m.def("residual_population", &residual_population, py::arg("p"), py::arg("v"),
        py::arg("rel_tol") = quad::default_rel_tol);
  m.def("onoff_ratio_estimate", &onoff_ratio_estimate, py::arg("p"));
  m.def("calibrate_kappa", &calibrate_kappa, py::arg("p"), py::arg("target_t1_off"),
        py::arg("rel_tol") = quad::default_rel_tol);

  m.def("model_sinis_current", &model_sinis_current, py::arg("v"), py::arg("jp"),
        py::arg("rel_tol") = quad::default_rel_tol);
  m.def("fit_iv", &fit_iv, py::arg("data"), py::arg("init"),
        py::arg("opts") = FitOptions{});
  m.def("load_iv_csv", &load_iv_csv, py::arg("path"));

  m.def("simulate_transient", &simulate_transient, py::arg("pulse"), py::arg("cp"),
        py::arg("horizon"), py::arg("rel_tol") = 1e-6,
        py::arg("max_steps") = 2000000);
  m.def(
      "instantaneous_t1",
      [](const TransientTrace& trace, const QcrQubitParams& p, double rel_tol) {
        return instantaneous_t1(trace, p, rel_tol);
      },
      py::arg("trace"), py::arg("p"), py::arg("rel_tol") = quad::default_rel_tol);

  m.def("propagate_population", &propagate_population, py::arg("schedule"),
        py::arg("extra_down_rate"), py::arg("p0"), py::arg("horizon"));
  m.def("run_reset_protocol",
        [](const ResetConfig& cfg, double amplitude_frac, double length) {
          return run_reset_protocol(cfg, amplitude_frac, length);
        },
        py::arg("cfg"), py::arg("amplitude_frac"), py::arg("length"));

  py::class_<ResetConfig>(m, "ResetConfig")
      .def(py::init<>())
      .def_readwrite("p", &ResetConfig::p)
      .def_readwrite("cp", &ResetConfig::cp)
      .def_readwrite("intrinsic_t1", &ResetConfig::intrinsic_t1)
      .def_readwrite("p0", &ResetConfig::p0)
      .def_readwrite("readout_delay", &ResetConfig::readout_delay)
      .def_readwrite("amplitudes_frac", &ResetConfig::amplitudes_frac)
      .def_readwrite("lengths", &ResetConfig::lengths);

  m.attr("elementary_charge") = constants::e;
  m.attr("planck_h") = constants::h;
  m.attr("boltzmann_k") = constants::k_b;
  m.attr("quantum_resistance") = constants::r_k;

#ifdef QCRSIM_VERSION_INFO
  m.attr("__version__") = QCRSIM_VERSION_INFO;
#else
  m.attr("__version__") = qcrsim::version;
#endif
}
