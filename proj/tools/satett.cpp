// satett: simulate, validate and analyze subgroup treatment effects with external data.
#include "satett/harness.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Subgroup treatment effects in a target trial, optionally borrowing external data"};
  app.require_subcommand(1);

  std::string sim_config;
  std::string sim_out;
  std::uint64_t sim_seed = 0;
  int sim_reps = 0;
  auto* simulate = app.add_subcommand("simulate", "Run a simulation study and write replication and metric tables");
  simulate->add_option("--config", sim_config, "Simulation config (JSON)")->required();
  auto* out_opt = simulate->add_option("--out-dir", sim_out, "Output directory (overrides the config)");
  auto* seed_opt = simulate->add_option("--seed", sim_seed, "Base seed (overrides the config)");
  auto* reps_opt = simulate->add_option("--reps", sim_reps, "Replications per cell (overrides the config)")
                       ->check(CLI::PositiveNumber);

  std::string data_path, schema_path;
  auto* validate = app.add_subcommand("validate", "Check a CSV against a column schema and the data invariants");
  validate->add_option("--data", data_path, "CSV file")->required();
  validate->add_option("--schema", schema_path, "Column schema (JSON)")->required();

  std::string analyze_config;
  auto* analyze = app.add_subcommand("analyze", "Estimate subgroup effects on a user dataset");
  analyze->add_option("--config", analyze_config, "Analysis config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : satett::harness::kConfigError;
  }

  if (*simulate) {
    satett::harness::SimulateOverrides overrides;
    if (*out_opt) overrides.out_dir = sim_out;
    if (*seed_opt) overrides.seed = sim_seed;
    if (*reps_opt) overrides.reps = sim_reps;
    return satett::harness::cmd_simulate(sim_config, overrides, std::cout, std::cerr);
  }
  if (*validate) return satett::harness::cmd_validate(data_path, schema_path, std::cout, std::cerr);
  return satett::harness::cmd_analyze(analyze_config, std::cout, std::cerr);
}
