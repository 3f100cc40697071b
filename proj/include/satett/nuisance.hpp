#pragma once

#include "satett/data.hpp"
#include "satett/forest.hpp"
#include "satett/gp.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace satett::estimators {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Per-unit nuisance predictions m(1,.), m(0,.), pi, eta.
struct NuisanceFits {
  VectorXd m1;
  VectorXd m0;
  VectorXd pi;
  VectorXd eta;
  std::string learner_id;
  bool pooled = true;  ///< fit on every source rather than the trial alone
};

struct LearnerSettings {
  double ols_ridge = 0.0;
  double logistic_ridge = 1e-6;
  int logistic_max_iter = 100;
  double logistic_tol = 1e-8;
  learners::ForestSettings forest;
  learners::KernelConfig gp_init;
};

/// Covariate matrices handed to each family of nuisance models. Both default to
/// the dataset's own covariates; a misspecified design swaps in a transform.
struct FeatureViews {
  std::optional<MatrixXd> outcome;
  std::optional<MatrixXd> propensity;

  /// [X~ view, V] for outcome models.
  MatrixXd outcome_design(const data::TrialDataset& data) const;
  /// [X~ view, V] for treatment and source models.
  MatrixXd propensity_design(const data::TrialDataset& data) const;
};

/// Linear outcome models per arm and logistic pi, eta. With `pooled == false`
/// every model is fit on S = 1 rows only and eta is not estimated (set to 1).
/// When every unit is in the trial, eta is exactly 1.
NuisanceFits fit_glm_nuisances(const data::TrialDataset& data, const LearnerSettings& settings,
                               const FeatureViews& views = {}, bool pooled = true);

/// Random-forest versions of every nuisance (pooled).
NuisanceFits fit_forest_nuisances(const data::TrialDataset& data, const LearnerSettings& settings,
                                  const FeatureViews& views, std::uint64_t seed);

/// GP posterior-mean outcome models per arm (pooled).
struct GpOutcomeModels {
  learners::GpPolyModel arm1;
  learners::GpPolyModel arm0;
};
GpOutcomeModels fit_gp_outcomes(const data::TrialDataset& data, const LearnerSettings& settings,
                                const FeatureViews& views = {});

/// Rows with A = arm (and S = 1 when trial_only).
std::vector<Eigen::Index> arm_rows(const data::TrialDataset& data, int arm, bool trial_only);
MatrixXd take_rows(const MatrixXd& m, const std::vector<Eigen::Index>& rows);
VectorXd take_rows(const VectorXd& v, const std::vector<Eigen::Index>& rows);

}  // namespace satett::estimators
