#include "ifesim/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <thread>

#include "ifesim/csv.hpp"
#include "ifesim/effective_field.hpp"
#include "ifesim/oracle.hpp"
#include "ifesim/units.hpp"

namespace ifesim {

namespace fs = std::filesystem;

const std::vector<ScenarioInfo>& scenario_registry() {
  static const std::vector<ScenarioInfo> r = {
      {"fig3", "single spin: Sx, Sy, Sz during and after the pulse for each B"},
      {"fig4", "single spin: effective fields f, g, h (meV and tesla-equivalent) for each B"},
      {"table1", "single spin: Larmor periods and their ratio to the pulse duration"},
      {"sudden", "single spin: phase offset of the full run against the sudden baseline"},
      {"fig5a", "antiferromagnet, z axis, Jex = 3 meV, Delta = 2 meV: M"},
      {"fig5b", "antiferromagnet, z axis, Jex = 3 meV, Delta = 2 meV: L"},
      {"fig5c", "antiferromagnet, z axis, Jex = 3 meV, Delta = 0.02 meV: M"},
      {"fig5d", "antiferromagnet, z axis, Jex = 3 meV, Delta = 0.02 meV: L"},
      {"fig5e", "antiferromagnet, x axis, Jex = 3 meV, Delta = -0.02 meV: M"},
      {"fig5f", "antiferromagnet, x axis, Jex = 3 meV, Delta = -0.02 meV: L"},
      {"fig5g", "antiferromagnet, x axis, Jex = 3 meV, Delta = -2 meV: M"},
      {"fig5h", "antiferromagnet, x axis, Jex = 3 meV, Delta = -2 meV: L"},
      {"fig5i", "antiferromagnet, x axis, Jex = 0, Delta = -2 meV: M"},
      {"fig5j", "antiferromagnet, x axis, Jex = 0, Delta = -2 meV: L"},
  };
  return r;
}

bool is_scenario(const std::string& name) {
  const auto& r = scenario_registry();
  return std::any_of(r.begin(), r.end(), [&](const ScenarioInfo& i) { return i.name == name; });
}

bool ScenarioOutcome::audits_pass() const {
  return std::all_of(files.begin(), files.end(), [](const OutputFile& f) { return all_pass(f.audit); });
}

namespace {

const std::vector<std::string> common_keys = {"scenario",  "oracle",        "oracle_tol",    "sample_fs",
                                              "dt_au",     "span_T",        "t_end_fs",      "post_step_au",
                                              "T_fs",      "omega0_eV",     "fluence_mJcm2", "intensity_Wcm2"};
const std::vector<std::string> spin_keys = {"B_T",       "lambda_meV", "mu",      "eps_1s_Ha",
                                            "eps_2p_Ha", "tau_p_fs",   "window_fs"};
const std::vector<std::string> afm_keys = {"Jex_meV", "axis", "Delta_meV", "Delta_e_meV",
                                           "eps_ex_eV", "d0", "mode", "full_diagnostic"};

struct Fig5Preset {
  CrystalAxis axis;
  double Jex_meV, Delta_meV;
};

Fig5Preset fig5_preset(char panel) {
  switch (panel) {
    case 'a': case 'b': return {CrystalAxis::z, 3, 2};
    case 'c': case 'd': return {CrystalAxis::z, 3, 0.02};
    case 'e': case 'f': return {CrystalAxis::x, 3, -0.02};
    case 'g': case 'h': return {CrystalAxis::x, 3, -2};
    default: return {CrystalAxis::x, 0, -2};
  }
}

double pulse_amplitude(const ConfigSection& s, double T_fs, double omega0_eV, bool fluence_default,
                       double default_value) {
  const bool fl = s.has("fluence_mJcm2"), in = s.has("intensity_Wcm2");
  if (fl && in) s.fail("intensity_Wcm2", "give exactly one of fluence_mJcm2 and intensity_Wcm2");
  if (fl || (!in && fluence_default)) {
    const double v = s.get_double("fluence_mJcm2", default_value);
    if (!(v > 0)) s.fail("fluence_mJcm2", "must be > 0");
    return amplitude_from_fluence(v, T_fs, omega0_eV);
  }
  const double v = s.get_double("intensity_Wcm2", default_value);
  if (!(v > 0)) s.fail("intensity_Wcm2", "must be > 0");
  return amplitude_from_intensity(v);
}

double positive(const ConfigSection& s, const std::string& key, double fallback) {
  const double v = s.get_double(key, fallback);
  if (!(v > 0)) s.fail(key, "must be > 0");
  return v;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

ScenarioJob prepare_job(const ConfigSection& sec, const ConfigSection& global) {
  ScenarioJob job;
  job.section = sec.name();
  job.scenario = sec.get_string("scenario", sec.name());
  if (!is_scenario(job.scenario)) sec.fail("scenario", "unknown scenario '" + job.scenario + "' (see list-scenarios)");
  job.sample_fs = positive(sec, "sample_fs", global.get_double("sample_fs", 1.0));
  job.oracle = sec.get_bool("oracle", global.get_bool("oracle", false));
  const bool afm = job.scenario.rfind("fig5", 0) == 0;

  std::vector<std::string> allowed = common_keys;
  const auto& extra = afm ? afm_keys : spin_keys;
  allowed.insert(allowed.end(), extra.begin(), extra.end());
  sec.require_known(allowed);

  const double T_fs = positive(sec, "T_fs", 100);
  const double dt = positive(sec, "dt_au", 0.1);
  const double span = positive(sec, "span_T", 6);
  const double post = positive(sec, "post_step_au", 4);

  if (!afm) {
    SpinJob j;
    j.base.lambda = units::meV_to_au(sec.get_double("lambda_meV", 20));
    if (j.base.lambda < 0) sec.fail("lambda_meV", "must be >= 0");
    j.base.mu = sec.get_double("mu", -0.5);
    j.base.eps_1s = sec.get_double("eps_1s_Ha", -0.5);
    j.base.eps_2p = sec.get_double("eps_2p_Ha", -0.125);
    if (!(j.base.eps_2p > j.base.eps_1s)) sec.fail("eps_2p_Ha", "must lie above eps_1s_Ha");
    const double w0 = sec.has("omega0_eV") ? units::eV_to_au(positive(sec, "omega0_eV", 1))
                                           : j.base.eps_2p - j.base.eps_1s;
    j.base.pulse = {pulse_amplitude(sec, T_fs, units::au_to_eV(w0), true, 2.0), units::fs_to_au(T_fs), w0, 0};
    const std::vector<double> defB = job.scenario == "table1" ? std::vector<double>{7, 20} : std::vector<double>{0, 7, 20};
    j.B_T = sec.get_list("B_T", defB);
    if (job.scenario == "table1")
      for (double b : j.B_T)
        if (!(b > 0)) sec.fail("B_T", "Larmor periods need B > 0");
    j.opt.dt = dt;
    j.opt.span = span;
    j.opt.post_step = post;
    const double t_end_default = job.scenario == "fig4" ? 600 : 3000;
    j.opt.t_end = units::fs_to_au(positive(sec, "t_end_fs", t_end_default));
    j.tau_p_fs = positive(sec, "tau_p_fs", 200);
    j.window_fs = positive(sec, "window_fs", 1000);
    job.oracle_tol = positive(sec, "oracle_tol", 1e-6);
    job.model = j;
  } else {
    AntiferroJob j;
    const Fig5Preset pr = fig5_preset(job.scenario.back());
    const std::string ax = sec.get_string("axis", pr.axis == CrystalAxis::z ? "z" : "x");
    if (ax != "z" && ax != "x") sec.fail("axis", "expected z or x");
    j.spec.axis = ax == "z" ? CrystalAxis::z : CrystalAxis::x;
    j.spec.Jex = units::meV_to_au(sec.get_double("Jex_meV", pr.Jex_meV));
    if (j.spec.Jex < 0) sec.fail("Jex_meV", "must be >= 0");
    j.spec.Delta = units::meV_to_au(sec.get_double("Delta_meV", pr.Delta_meV));
    if (j.spec.axis == CrystalAxis::z && !(j.spec.Delta > 0)) sec.fail("Delta_meV", "axis z needs Delta > 0");
    if (j.spec.axis == CrystalAxis::x && !(j.spec.Delta < 0)) sec.fail("Delta_meV", "axis x needs Delta < 0");
    j.spec.Delta_e = units::meV_to_au(sec.get_double("Delta_e_meV", j.spec.axis == CrystalAxis::z ? 3 : -3));
    j.spec.eps_ex = units::eV_to_au(positive(sec, "eps_ex_eV", 2));
    j.spec.d0 = sec.get_double("d0", 1);
    const double w0_eV = positive(sec, "omega0_eV", 2);
    j.spec.pulse = {pulse_amplitude(sec, T_fs, w0_eV, false, 2e10), units::fs_to_au(T_fs), units::eV_to_au(w0_eV), 0};
    j.opt.dt = dt;
    j.opt.span = span;
    j.opt.post_step = post;
    j.opt.t_end = units::fs_to_au(positive(sec, "t_end_fs", 3000));
    const std::string mode = sec.get_string("mode", "live");
    if (mode != "live" && mode != "frozen") sec.fail("mode", "expected live or frozen");
    j.opt.mode = mode == "live" ? ExchangeMode::live : ExchangeMode::frozen;
    j.opt.full_diagnostic = sec.get_bool("full_diagnostic", true);
    job.oracle_tol = positive(sec, "oracle_tol", 1e-5);
    job.model = j;
  }
  try {
    if (auto* s = std::get_if<SpinJob>(&job.model)) {
      validate(s->base);
      check_grid(s->base.pulse, TimeGrid::around(s->base.pulse, s->opt.span, s->opt.dt));
    } else {
      auto& a = std::get<AntiferroJob>(job.model);
      validate(a.spec);
      check_grid(a.spec.pulse, TimeGrid::around(a.spec.pulse, a.opt.span, a.opt.dt));
    }
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    std::string key = "scenario";
    if (msg.find("carrier") != std::string::npos && sec.has("dt_au")) key = "dt_au";
    if (msg.find("span") != std::string::npos && sec.has("span_T")) key = "span_T";
    sec.fail(key, msg);
  }
  return job;
}

namespace {

std::string b_tag(double B) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "B%gT", B);
  return buf;
}

OutputFile emit(const std::string& dir, const std::string& name, const Series& s) {
  write_csv((fs::path(dir) / name).string(), s);
  return {name, s.names, audit_series(s)};
}

void run_spin(const ScenarioJob& job, const SpinJob& j, const std::string& dir, ScenarioOutcome& out) {
  const double fwhm_fs = units::au_to_fs(intensity_fwhm(j.base.pulse));
  if (job.scenario == "table1") {
    out.report.push_back("B_T  T_L(ps)  2pi/B(ps)  T_L/FWHM");
    std::string csv = "B_T,TL_ps,TL_exact_ps,ratio_to_fwhm\n";
    for (double B : j.B_T) {
      const double b = units::tesla_to_au(B);
      const double TL = units::au_to_fs(measure_larmor_period(b)) / 1000;
      const double exact = units::au_to_fs(2 * units::pi / b) / 1000;
      char buf[160];
      std::snprintf(buf, sizeof buf, "%g  %.4f  %.4f  %.1f", B, TL, exact, TL * 1000 / fwhm_fs);
      out.report.push_back(buf);
      std::snprintf(buf, sizeof buf, "%.16e,%.16e,%.16e,%.16e\n", B, TL, exact, TL * 1000 / fwhm_fs);
      csv += buf;
    }
    std::ofstream((fs::path(dir) / (job.section + ".csv")).string(), std::ios::binary) << csv;
    out.files.push_back({job.section + ".csv", {"B_T", "TL_ps", "TL_exact_ps", "ratio_to_fwhm"}, {}});
    return;
  }
  if (job.scenario == "sudden") {
    std::string csv = "B_T,offset_deg,tau_p_fs,window_fs\n";
    for (double B : j.B_T) {
      SingleSpinSpec s = j.base;
      s.B = units::tesla_to_au(B);
      const SuddenResult r = sudden_comparison(s, j.opt, j.tau_p_fs, j.window_fs);
      std::string verdict;
      const double target = B == 7 ? 14 : B == 20 ? 47 : B == 0 ? 0 : -1;
      if (target >= 0) {
        const bool ok = std::abs(std::abs(r.offset_deg) - target) <= 3;
        verdict = std::string(ok ? "  [within" : "  [outside") + " 3 deg of " + fmt("%g", target) + " deg]";
      }
      out.report.push_back("B = " + fmt("%g", B) + " T: offset " + fmt("%.3f", r.offset_deg) + " deg" + verdict);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%.16e,%.16e,%.16e,%.16e\n", B, r.offset_deg, j.tau_p_fs, j.window_fs);
      csv += buf;
    }
    std::ofstream((fs::path(dir) / (job.section + ".csv")).string(), std::ios::binary) << csv;
    out.files.push_back({job.section + ".csv", {"B_T", "offset_deg", "tau_p_fs", "window_fs"}, {}});
    return;
  }

  double ref_f = -1, ref_g = -1;
  for (double B : j.B_T) {
    SingleSpinSpec s = j.base;
    s.B = units::tesla_to_au(B);
    const SpinRun run = run_single_spin(s, j.opt);
    Series keep(std::vector<std::string>{"Sx", "Sy", "Sz"});
    keep.t = run.traj.series.t;
    keep.cols = {run.traj.series.col("Sx"), run.traj.series.col("Sy"), run.traj.series.col("Sz")};
    if (job.scenario == "fig4") {
      for (const char* n : {"f", "g", "h"}) {
        std::vector<double> mev = run.traj.series.col(n), tesla = mev;
        for (double& v : mev) v = units::au_to_meV(v);
        for (double& v : tesla) v = units::au_to_tesla(v);
        keep.add_column(std::string(n) + "_meV", mev);
        keep.add_column(std::string(n) + "_T", tesla);
      }
      double pf = 0, pg = 0;
      for (std::size_t k = 0; k < run.fgh.f.size(); ++k) {
        pf = std::max(pf, std::abs(run.fgh.f[k]));
        pg = std::max(pg, std::abs(run.fgh.g[k]));
      }
      std::string line = "B = " + fmt("%g", B) + " T: peak |f| = " + fmt("%.2f", units::au_to_tesla(pf)) +
                         " T, peak |g| = " + fmt("%.2f", units::au_to_tesla(pg)) + " T";
      if (ref_f < 0) {
        ref_f = pf;
        ref_g = pg;
      } else {
        line += " (change vs first B: f " + fmt("%+.2f", 100 * (pf - ref_f) / ref_f) + " %, g " +
                fmt("%+.2f", 100 * (pg - ref_g) / ref_g) + " %)";
      }
      out.report.push_back(line);
    }
    keep.add_column("envelope", run.traj.series.col("envelope"));
    if (job.oracle) {
      const Series orc = spin_oracle(s, run);
      const OracleReport rep = oracle_compare(keep, orc, job.oracle_tol, {"Sx", "Sy", "Sz"});
      std::vector<double> dev(keep.size());
      for (std::size_t k = 0; k < dev.size(); ++k)
        for (const char* n : {"Sx", "Sy", "Sz"}) dev[k] = std::max(dev[k], std::abs(keep.col(n)[k] - orc.col(n)[k]));
      keep.add_column("oracle_dev", dev);
      out.report.push_back("B = " + fmt("%g", B) + " T: oracle max deviation " + fmt("%.3e", rep.max_abs));
    }
    const auto& S = run.traj.series;
    out.report.push_back("B = " + fmt("%g", B) + " T: final S = (" + fmt("%.6f", S.col("Sx").back()) + ", " +
                         fmt("%.6f", S.col("Sy").back()) + ", " + fmt("%.6f", S.col("Sz").back()) + ")");
    OutputFile f = emit(dir, job.section + "_" + b_tag(B) + ".csv", thin(keep, units::fs_to_au(job.sample_fs)));
    // invariants are audited on the full-resolution trajectory
    f.audit = audit_series(keep);
    if (job.oracle) {
      const auto& dev = keep.col("oracle_dev");
      const double m = *std::max_element(dev.begin(), dev.end());
      f.audit.push_back({"oracle max deviation", m, job.oracle_tol, m <= job.oracle_tol});
    }
    out.files.push_back(f);
  }
}

void run_afm(const ScenarioJob& job, const AntiferroJob& j, const std::string& dir, ScenarioOutcome& out) {
  const AntiferroRun run = run_antiferro(j.spec, j.opt);
  Series keep = run.series;
  if (j.opt.full_diagnostic) {
    keep.add_column("diag_Mx", run.full.col("Mx"));
    keep.add_column("diag_My", run.full.col("My"));
    keep.add_column("diag_Lz", run.full.col("Lz"));
    keep.add_column("diag_sum_m", run.full.col("sum_m"));
    keep.add_column("diag_excluded", run.full.col("max_excluded"));
    keep.add_column("diag_deviation", run.full.col("deviation"));
  }
  const GroundState& g = run.ground;
  out.report.push_back("ground state: c = " + fmt("%.9f", g.c) + ", d = " + fmt("%.9f", g.d) +
                       ", Jx1 = " + fmt("%.9f", g.Jx1));
  out.report.push_back("Raman plateau change after t0 + 4.5T: " + fmt("%.2e", run.raman.tail_change));
  out.report.push_back("post-pulse mean-field energy drift (relative): " + fmt("%.2e", run.post_energy_drift));
  double mz = 0;
  for (double v : run.series.col("Mz")) mz = std::max(mz, std::abs(v));
  out.report.push_back("max |Mz| = " + fmt("%.4e", mz));
  try {
    const double P = crossing_period(run.series.t, run.series.col("Mz"), j.spec.pulse.t0 + field_tail * j.spec.pulse.T);
    out.report.push_back("post-pulse Mz period = " + fmt("%.1f", units::au_to_fs(P)) + " fs (" +
                         fmt("%.2f", P / intensity_fwhm(j.spec.pulse)) + " x intensity FWHM)");
  } catch (const std::exception&) {
    out.report.push_back("post-pulse Mz period: no oscillation in the window");
  }
  if (j.opt.full_diagnostic) {
    double dev = 0;
    for (double v : run.full.col("deviation")) dev = std::max(dev, v);
    out.report.push_back("32-variable diagnostic max deviation from the reduced system: " + fmt("%.2e", dev));
  }

  OutputFile f{job.section + ".csv", keep.names, audit_series(keep)};
  if (j.opt.mode == ExchangeMode::live && run.series.size() > 1)
    f.audit.push_back({"post-pulse mean-field energy constant to 1e-8", run.post_energy_drift, 1e-8,
                       run.post_energy_drift <= 1e-8});
  if (job.oracle) {
    AntiferroOptions fo = j.opt;
    fo.mode = ExchangeMode::frozen;
    fo.oracle = true;
    fo.full_diagnostic = false;
    const AntiferroRun fr = run_antiferro(j.spec, fo);
    const OracleReport rep = oracle_compare(fr.vars, fr.oracle, job.oracle_tol);
    f.audit.push_back({"oracle (frozen exchange) max deviation", rep.max_abs, job.oracle_tol, rep.pass()});
    if (j.opt.mode == ExchangeMode::live) {
      AntiferroOptions lo = j.opt;
      lo.oracle = true;
      lo.full_diagnostic = false;
      const AntiferroRun lr = run_antiferro(j.spec, lo);
      out.report.push_back("live-exchange trajectory vs frozen oracle (informational): " +
                           fmt("%.3e", oracle_compare(lr.vars, lr.oracle, job.oracle_tol).max_abs));
    }
  }
  write_csv((fs::path(dir) / f.file).string(), thin(keep, units::fs_to_au(job.sample_fs)));
  out.files.push_back(f);
}

}  // namespace

ScenarioOutcome execute_job(const ScenarioJob& job, const std::string& output_dir) {
  ScenarioOutcome out;
  out.section = job.section;
  out.scenario = job.scenario;
  try {
    fs::create_directories(output_dir);
    if (const auto* s = std::get_if<SpinJob>(&job.model))
      run_spin(job, *s, output_dir, out);
    else
      run_afm(job, std::get<AntiferroJob>(job.model), output_dir, out);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

int run_config(const Config& cfg, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<ScenarioJob> jobs;
  std::string dir;
  int workers = 1;
  try {
    cfg.global.require_known({"output_dir", "workers", "oracle", "sample_fs"});
    dir = cfg.global.get_string("output_dir", "ifesim_out");
    workers = cfg.global.get_int("workers", 1);
    if (workers < 1) cfg.global.fail("workers", "must be >= 1");
    if (cfg.sections.empty()) throw ConfigError(cfg.source + ": no scenario sections");
    for (const auto& sec : cfg.sections) {
      jobs.push_back(prepare_job(sec, cfg.global));
      if (opt.force_oracle) jobs.back().oracle = true;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }
  if (!opt.output_dir.empty()) dir = opt.output_dir;
  if (const char* env = std::getenv("IFESIM_OUTPUT_DIR"); env && *env) dir = env;
  if (opt.workers > 0) workers = opt.workers;

  std::vector<ScenarioOutcome> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) results[i] = execute_job(jobs[i], dir);
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(workers, static_cast<int>(jobs.size()));
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  nlohmann::json manifest = nlohmann::json::array();
  std::string audit_text;
  bool error = false, audit_ok = true;
  for (const auto& r : results) {
    out << "[" << r.section << "] scenario " << r.scenario << "\n";
    for (const auto& line : r.report) out << "  " << line << "\n";
    audit_text += "[" + r.section + "] " + r.scenario + "\n";
    if (!r.error.empty()) {
      err << "[" << r.section << "] error: " << r.error << "\n";
      audit_text += "  ERROR " + r.error + "\n";
      error = true;
      continue;
    }
    for (const auto& f : r.files) {
      out << "  wrote " << (fs::path(dir) / f.file).string() << "\n";
      const std::string block = format_audit(f.audit, "    ");
      out << block;
      audit_text += "  " + f.file + "\n" + block;
      manifest.push_back({{"section", r.section}, {"scenario", r.scenario}, {"file", f.file}, {"columns", f.columns}});
    }
    audit_ok = audit_ok && r.audits_pass();
  }
  try {
    fs::create_directories(dir);
    std::ofstream((fs::path(dir) / "manifest.json").string(), std::ios::binary) << manifest.dump(2) << "\n";
    std::ofstream((fs::path(dir) / "audit.txt").string(), std::ios::binary) << audit_text;
  } catch (const std::exception& e) {
    err << "cannot write manifest: " << e.what() << "\n";
    return 1;
  }
  if (error) return 1;
  return audit_ok ? 0 : 2;
}

int audit_file(const std::string& path, std::ostream& out, std::ostream& err) {
  Series s;
  try {
    s = read_csv(path);
  } catch (const std::exception& e) {
    err << "audit: " << e.what() << "\n";
    return 1;
  }
  const auto a = audit_series(s);
  out << path << ": " << s.size() << " rows, " << a.size() << " applicable invariants\n" << format_audit(a);
  return all_pass(a) ? 0 : 2;
}

}  // namespace ifesim
