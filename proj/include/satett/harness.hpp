#pragma once

#include "satett/methods.hpp"
#include "satett/metrics.hpp"
#include "satett/simulation.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace satett::harness {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kInternalError = 1, kConfigError = 2, kGenerationError = 3 };

/// Bundled JSON schema by file name (e.g. "simulate.schema.json").
const json& schema(const std::string& name);

/// Validates `instance` against `schema_doc`. Supports the keyword subset used
/// by the bundled schemas: type, enum, required, properties,
/// additionalProperties (boolean), items, minItems, minimum, maximum,
/// exclusiveMinimum and $ref to another bundled schema. Returns one message
/// per violation, prefixed with its JSON pointer.
std::vector<std::string> validate_json(const json& instance, const json& schema_doc);

/// Reads the optional "estimators", "learners" and "inference" blocks of a config.
estimators::MethodSettings method_settings_from_json(const json& config);
std::vector<estimators::Method> methods_from_json(const json& list);

struct SimulatePlan {
  std::vector<simulation::ScenarioConfig> cells;
  std::vector<estimators::Method> methods;
  estimators::MethodSettings settings;
  std::filesystem::path out_dir;
};

struct SimulateOverrides {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
};

/// Validated plan; cell k uses base seed derive_seed(seed, k).
SimulatePlan simulate_plan(const json& config, const SimulateOverrides& overrides = {},
                           const std::filesystem::path& base_dir = ".");

struct SimulateOutput {
  std::vector<simulation::ReplicationRow> rows;
  MetricsTable metrics;
};

SimulateOutput run_simulate(const SimulatePlan& plan);
/// Writes replications.csv, metrics.csv and metrics.json into plan.out_dir.
void write_simulate_outputs(const SimulatePlan& plan, const SimulateOutput& output);

/// Analysis report for a user-supplied dataset.
json analyze(const json& config, const std::filesystem::path& base_dir);

int cmd_simulate(const std::filesystem::path& config, const SimulateOverrides& overrides, std::ostream& out,
                 std::ostream& err);
int cmd_analyze(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cmd_validate(const std::filesystem::path& data, const std::filesystem::path& schema_path, std::ostream& out,
                 std::ostream& err);

}  // namespace satett::harness
