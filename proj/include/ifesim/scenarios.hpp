#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "ifesim/antiferro.hpp"
#include "ifesim/audit.hpp"
#include "ifesim/config.hpp"
#include "ifesim/single_spin.hpp"

namespace ifesim {

struct ScenarioInfo {
  std::string name;
  std::string description;
};
const std::vector<ScenarioInfo>& scenario_registry();
bool is_scenario(const std::string& name);

struct SpinJob {
  SingleSpinSpec base;  // B is replaced per entry of B_T
  std::vector<double> B_T;
  SpinRunOptions opt;
  double tau_p_fs = 200;
  double window_fs = 1000;
};

struct AntiferroJob {
  AntiferroSpec spec;
  AntiferroOptions opt;
};

// A validated config section.
struct ScenarioJob {
  std::string section;
  std::string scenario;
  double sample_fs = 1.0;
  bool oracle = false;
  double oracle_tol = 0;
  std::variant<SpinJob, AntiferroJob> model;
};

// Throws ConfigError with line context on any invalid key or value.
ScenarioJob prepare_job(const ConfigSection& section, const ConfigSection& global);

struct OutputFile {
  std::string file;
  std::vector<std::string> columns;
  std::vector<AuditEntry> audit;
};

struct ScenarioOutcome {
  std::string section;
  std::string scenario;
  std::vector<OutputFile> files;
  std::vector<std::string> report;
  std::string error;
  bool audits_pass() const;
};

ScenarioOutcome execute_job(const ScenarioJob& job, const std::string& output_dir);

struct RunOptions {
  int workers = 0;           // 0: take from config (default 1)
  bool force_oracle = false;
  std::string output_dir;    // empty: config value, overridden by IFESIM_OUTPUT_DIR
};

// Runs every section; returns 0 when all audits pass, 2 on an audit failure, 1 on errors.
int run_config(const Config& cfg, const RunOptions& opt, std::ostream& out, std::ostream& err);

// Audits one CSV file; returns the same exit codes.
int audit_file(const std::string& path, std::ostream& out, std::ostream& err);

}  // namespace ifesim
