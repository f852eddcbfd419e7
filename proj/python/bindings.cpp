#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ifesim/antiferro.hpp"
#include "ifesim/config.hpp"
#include "ifesim/scenarios.hpp"
#include "ifesim/single_spin.hpp"
#include "ifesim/units.hpp"

namespace py = pybind11;
using namespace ifesim;

namespace {

py::dict series_dict(const Series& s) {
  py::dict d;
  std::vector<double> t_fs(s.t);
  for (double& t : t_fs) t = units::au_to_fs(t);
  d["t_fs"] = t_fs;
  for (std::size_t i = 0; i < s.names.size(); ++i) d[py::str(s.names[i])] = s.cols[i];
  return d;
}

SingleSpinSpec spin_spec(double B_T, double lambda_meV, double fluence, double T_fs) {
  SingleSpinSpec s;
  s.B = units::tesla_to_au(B_T);
  s.lambda = units::meV_to_au(lambda_meV);
  const double w0 = s.eps_2p - s.eps_1s;
  s.pulse = {amplitude_from_fluence(fluence, T_fs, units::au_to_eV(w0)), units::fs_to_au(T_fs), w0, 0};
  return s;
}

SpinRunOptions spin_opt(double dt, double t_end_fs) {
  SpinRunOptions o;
  o.dt = dt;
  o.t_end = units::fs_to_au(t_end_fs);
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Light-induced spin dynamics: single spin and two-sublattice antiferromagnet";

  m.def("scenarios", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : scenario_registry()) out.emplace_back(s.name, s.description);
    return out;
  });

  m.def("larmor_period_ps", [](double B_T) {
    return units::au_to_fs(measure_larmor_period(units::tesla_to_au(B_T))) / 1000;
  }, py::arg("B_T"));

  m.def("single_spin", [](double B_T, double lambda_meV, double fluence, double T_fs, double dt, double t_end_fs,
                          bool oracle) {
    const SingleSpinSpec s = spin_spec(B_T, lambda_meV, fluence, T_fs);
    SpinRun r;
    {
      py::gil_scoped_release nogil;
      r = run_single_spin(s, spin_opt(dt, t_end_fs));
    }
    py::dict d = series_dict(r.traj.series);
    if (oracle) {
      const Series o = spin_oracle(s, r);
      for (const char* n : {"Sx", "Sy", "Sz"}) d[py::str(std::string("oracle_") + n)] = o.col(n);
    }
    return d;
  }, py::arg("B_T") = 7.0, py::arg("lambda_meV") = 20.0, py::arg("fluence_mJcm2") = 2.0, py::arg("T_fs") = 100.0,
     py::arg("dt_au") = 0.1, py::arg("t_end_fs") = 3000.0, py::arg("oracle") = false,
     "Spin trajectory and fields f, g, h (a.u.) on the integration nodes.");

  m.def("sudden_offset_deg", [](double B_T, double tau_p_fs, double window_fs) {
    py::gil_scoped_release nogil;
    return sudden_comparison(spin_spec(B_T, 20, 2, 100), spin_opt(0.1, 3000), tau_p_fs, window_fs).offset_deg;
  }, py::arg("B_T"), py::arg("tau_p_fs") = 200.0, py::arg("window_fs") = 1000.0);

  m.def("solve_2p_levels", [](double B_T, double lambda_meV) {
    std::vector<py::dict> out;
    for (const auto& l : solve_2p_levels(units::tesla_to_au(B_T), units::meV_to_au(lambda_meV))) {
      py::dict d;
      d["E_meV"] = units::au_to_meV(l.E);
      d["branch"] = l.branch;
      d["alpha"] = l.alpha;
      d["beta"] = l.beta;
      d["gamma"] = l.gamma;
      out.push_back(d);
    }
    return out;
  }, py::arg("B_T"), py::arg("lambda_meV"));

  m.def("antiferro", [](const std::string& axis, double Jex_meV, double Delta_meV, double intensity, double dt,
                        double t_end_fs, const std::string& mode, bool full_diagnostic) {
    AntiferroSpec s;
    if (axis != "z" && axis != "x") throw py::value_error("axis must be 'z' or 'x'");
    if (mode != "live" && mode != "frozen") throw py::value_error("mode must be 'live' or 'frozen'");
    s.axis = axis == "z" ? CrystalAxis::z : CrystalAxis::x;
    s.Jex = units::meV_to_au(Jex_meV);
    s.Delta = units::meV_to_au(Delta_meV);
    s.Delta_e = units::meV_to_au(axis == "z" ? 3 : -3);
    s.eps_ex = units::eV_to_au(2);
    s.pulse = {amplitude_from_intensity(intensity), units::fs_to_au(100), units::eV_to_au(2), 0};
    AntiferroOptions o;
    o.dt = dt;
    o.t_end = units::fs_to_au(t_end_fs);
    o.mode = mode == "live" ? ExchangeMode::live : ExchangeMode::frozen;
    o.full_diagnostic = full_diagnostic;
    AntiferroRun r;
    {
      py::gil_scoped_release nogil;
      r = run_antiferro(s, o);
    }
    py::dict d = series_dict(r.series);
    if (full_diagnostic)
      for (std::size_t i = 0; i < r.full.names.size(); ++i) d[py::str("diag_" + r.full.names[i])] = r.full.cols[i];
    d["Jx1"] = r.ground.Jx1;
    d["post_energy_drift"] = r.post_energy_drift;
    return d;
  }, py::arg("axis"), py::arg("Jex_meV"), py::arg("Delta_meV"), py::arg("intensity_Wcm2") = 2e10,
     py::arg("dt_au") = 0.1, py::arg("t_end_fs") = 3000.0, py::arg("mode") = "live",
     py::arg("full_diagnostic") = false);

  m.def("run_config", [](const std::string& text, const std::string& output_dir, int workers) {
    const Config cfg = parse_config(text, "<string>");
    RunOptions o;
    o.output_dir = output_dir;
    o.workers = workers;
    std::ostringstream out, err;
    int code = 0;
    {
      py::gil_scoped_release nogil;
      code = run_config(cfg, o, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("config_text"), py::arg("output_dir"), py::arg("workers") = 1,
     "Runs a config given as text; returns (exit_code, stdout, stderr).");

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
}
