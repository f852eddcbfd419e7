#include <CLI11.hpp>
#include <iostream>

#include "ifesim/config.hpp"
#include "ifesim/scenarios.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Ultrafast inverse-Faraday spin dynamics simulator"};
  app.require_subcommand(1);

  std::string config_path;
  ifesim::RunOptions run_opt;
  auto* run = app.add_subcommand("run", "run every scenario section of a config file");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--workers", run_opt.workers, "parallel scenario workers")->check(CLI::PositiveNumber);
  run->add_flag("--oracle", run_opt.force_oracle, "compare every run against the Schroedinger oracle");
  run->add_option("--output-dir", run_opt.output_dir, "output directory (IFESIM_OUTPUT_DIR wins if set)");

  auto* list = app.add_subcommand("list-scenarios", "print the scenario registry");

  std::string csv_path;
  auto* audit = app.add_subcommand("audit", "check the invariants of an output CSV");
  audit->add_option("csv", csv_path, "CSV written by run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (list->parsed()) {
    for (const auto& s : ifesim::scenario_registry()) std::cout << s.name << "\t" << s.description << "\n";
    return 0;
  }
  if (audit->parsed()) return ifesim::audit_file(csv_path, std::cout, std::cerr);

  ifesim::Config cfg;
  try {
    cfg = ifesim::load_config(config_path);
  } catch (const ifesim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  return ifesim::run_config(cfg, run_opt, std::cout, std::cerr);
}
