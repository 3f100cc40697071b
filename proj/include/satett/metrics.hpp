#pragma once

#include "satett/simulation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace satett::harness {

struct MetricsRow {
  int scenario = 0;
  std::string cell;
  std::string method;
  int subgroup = 0;
  double truth = 0.0;
  std::optional<double> power;  ///< share of p < 0.05
  std::optional<double> mean_abs_bias;
  std::optional<double> variance;  ///< sample variance (n - 1); needs 2 reps
  std::optional<double> mse;       ///< variance + (mean - truth)^2
  std::optional<double> coverage;
  std::optional<double> mean_se;
  std::optional<double> mean_estimate;
  int reps_used = 0;
  int failures = 0;
};

struct MetricsTable {
  std::vector<MetricsRow> rows;

  const MetricsRow* find(const std::string& cell, const std::string& method, int subgroup) const;
};

/// Groups rows by (scenario, cell, method, subgroup) in order of first
/// appearance. Failed replications are counted but excluded from every moment.
MetricsTable aggregate_metrics(const std::vector<simulation::ReplicationRow>& rows);

std::string replications_csv(const std::vector<simulation::ReplicationRow>& rows);
std::string metrics_csv(const MetricsTable& table);
std::string metrics_json(const MetricsTable& table);

/// printf("%.17g"); "NA" for missing and non-finite values.
std::string format_number(double x);

}  // namespace satett::harness
