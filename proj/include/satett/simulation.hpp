#pragma once

#include "satett/data.hpp"
#include "satett/methods.hpp"
#include "satett/nuisance.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace satett::simulation {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Misspecification {
  bool data_treatment = false;  ///< pi and eta models see Z instead of W
  bool outcome = false;         ///< outcome models see Z instead of W

  std::string label() const;  ///< all-correct | data-treatment-miss | outcome-miss | all-miss
};

struct ScenarioConfig {
  int scenario = 1;
  int n_trial = 100;  ///< Scenario 1 only; Scenarios 2 and 3 draw S per unit
  int n_ext = 500;
  int reps = 100;
  std::uint64_t seed = 0;
  Misspecification misspec;
  double ppv_threshold = 50.0;

  void check() const;
  /// Cell label used in outputs: "n_ext=<k>" for Scenario 1, "ppv" for 2, misspec label for 3.
  std::string cell() const;
};

struct GeneratedData {
  data::TrialDataset dataset;
  VectorXd y0;
  VectorXd y1;
  std::map<int, double> truth;
  data::PositivityDiagnostics diagnostics;
  estimators::FeatureViews views;
  int attempts = 1;
};

/// C with mean of expit(C - 0.5 x - 1.2 v) equal to target_prop, by bisection on [-50, 50].
double solve_intercept_C(const VectorXd& xtilde, const VectorXd& v, double target_prop);

/// External-data size grid n_trial + n_ext with mean enrollment probability 100 / (100 + n_ext).
GeneratedData gen_scenario1(int n_ext, std::uint64_t seed, int n_trial = 100);

/// Positivity-violation design (n = 550, eta = 0.0909). Datasets are redrawn from
/// successive streams of `seed` until max eta-hat / pi-hat exceeds the threshold.
GeneratedData gen_scenario2_ppv(std::uint64_t seed, double threshold = 50.0, int max_attempts = 10000);

/// Misspecification design (n = 500) with Z = sin(W / (W + 1) + 2) substituted in flagged models.
GeneratedData gen_scenario3_misspec(std::uint64_t seed, Misspecification flags);

double sine_transform(double w);

GeneratedData generate(const ScenarioConfig& cfg, std::uint64_t seed);

struct ReplicationRow {
  int scenario = 0;
  std::string cell;
  std::string method;
  int subgroup = 0;
  int replication = 0;
  bool failed = false;
  std::string error;
  double estimate = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  bool covered = false;
  double truth = 0.0;
  double max_weight = 0.0;
  int n_trial = 0;
  int n_ext = 0;
  std::uint64_t seed = 0;
};

struct ScenarioResult {
  std::vector<ReplicationRow> rows;
};

/// Seed of replication r: derive_seed(base, r).
std::uint64_t replication_seed(std::uint64_t base, int r);

/// Generates each replication and runs every method on subgroups {0, 1}.
/// Rows are ordered by replication, method, subgroup regardless of the number
/// of worker threads (capped by SATETT_THREADS).
ScenarioResult run_replications(const ScenarioConfig& cfg, const std::vector<estimators::Method>& methods,
                                const estimators::MethodSettings& settings = {});

int worker_count();

// Discrete identification oracle ------------------------------------------------

/// Fully discrete DGP over covariate cells x = (x~, v). Potential outcomes are
/// allowed to depend on the source and the received treatment so that
/// assumption violations can be expressed:
///   E[Y(a) | X = x, S = s, A = a'] = mu[a][x][s][a'].
struct DiscreteDgp {
  std::vector<int> v;           ///< subgroup code of each cell
  std::vector<double> p_x;      ///< P(X = x)
  std::vector<double> p_s1;     ///< P(S = 1 | X = x)
  std::vector<double> p_a1[2];  ///< P(A = 1 | X = x, S = s), indexed [s][x]
  std::vector<double> mu[2][2][2];  ///< mu[a][s][a'][x]
};

struct IdentificationResult {
  double truth = 0.0;           ///< E[Y(1) - Y(0) | V = v, S = 1]
  double identification = 0.0;  ///< E[E[Y|A=1,X] - E[Y|A=0,X] | V = v, S = 1]
};

IdentificationResult discrete_identification_oracle(const DiscreteDgp& dgp, int v);

}  // namespace satett::simulation
