#pragma once

#include "satett/cdml.hpp"
#include "satett/estimators.hpp"
#include "satett/riesz.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace satett::estimators {

enum class Method { naive, cov_adj, dr_glm, dr_ranger, covbal, riesz, cdml };

/// Method ids in canonical order.
const std::vector<std::string>& method_ids();
/// Throws OutOfScopeError for dr-bart / dr-bayglm and ConfigError (listing the
/// valid ids) for anything else unknown.
Method parse_method(const std::string& id);
std::string method_id(Method m);

struct MethodSettings {
  LearnerSettings learners;
  double lambda = 0.01;
  double qp_tol = 1e-8;
  int qp_max_iter = 50000;
  double riesz_ridge = 1e-4;
  std::string riesz_basis = "linear";  ///< linear | saturated
  int bootstrap_B = 500;
};

struct MethodOutcome {
  Method method;
  int v = 1;
  std::optional<EstimateReport> report;
  std::string error;  ///< set when report is empty
};

/// Runs every method for every subgroup code on one dataset. Nuisance fits are
/// shared across subgroups; a failure is recorded per (method, subgroup) cell.
/// Randomized learners draw from seeds derived from `seed`.
std::vector<MethodOutcome> run_methods(const data::TrialDataset& data, const std::vector<Method>& methods,
                                       const std::vector<int>& subgroups, const FeatureViews& views,
                                       const MethodSettings& settings, std::uint64_t seed);

}  // namespace satett::estimators
