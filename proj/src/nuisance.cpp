#include "satett/nuisance.hpp"

#include "satett/error.hpp"
#include "satett/linear.hpp"
#include "satett/logistic.hpp"
#include "satett/rng.hpp"

namespace satett::estimators {

namespace {

MatrixXd with_subgroup(const MatrixXd& x, const data::TrialDataset& data) {
  MatrixXd out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x;
  out.col(x.cols()) = data.v().cast<double>();
  return out;
}

std::vector<Eigen::Index> trial_rows(const data::TrialDataset& data) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(data.n()); ++i)
    if (data.s()[i] == 1) rows.push_back(i);
  return rows;
}

}  // namespace

MatrixXd FeatureViews::outcome_design(const data::TrialDataset& data) const {
  return with_subgroup(outcome ? *outcome : data.xtilde(), data);
}

MatrixXd FeatureViews::propensity_design(const data::TrialDataset& data) const {
  return with_subgroup(propensity ? *propensity : data.xtilde(), data);
}

std::vector<Eigen::Index> arm_rows(const data::TrialDataset& data, int arm, bool trial_only) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(data.n()); ++i)
    if (data.a()[i] == arm && (!trial_only || data.s()[i] == 1)) rows.push_back(i);
  return rows;
}

MatrixXd take_rows(const MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(rows[k]);
  return out;
}

VectorXd take_rows(const VectorXd& v, const std::vector<Eigen::Index>& rows) {
  VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[rows[k]];
  return out;
}

NuisanceFits fit_glm_nuisances(const data::TrialDataset& data, const LearnerSettings& settings,
                               const FeatureViews& views, bool pooled) {
  const MatrixXd xo = views.outcome_design(data);
  const MatrixXd xp = views.propensity_design(data);
  NuisanceFits fits;
  fits.learner_id = pooled ? "glm" : "glm-trial";
  fits.pooled = pooled;

  for (int arm : {1, 0}) {
    const auto rows = arm_rows(data, arm, !pooled);
    if (rows.empty()) throw InsufficientDataError("no units in arm " + std::to_string(arm) + " for the outcome model");
    const auto model = learners::fit_ols(take_rows(xo, rows), take_rows(data.y(), rows), settings.ols_ridge);
    (arm == 1 ? fits.m1 : fits.m0) = model.predict(xo);
  }

  const VectorXd a = data.a().cast<double>();
  if (pooled) {
    fits.pi = learners::fit_logistic_irls(xp, a, settings.logistic_ridge, settings.logistic_max_iter,
                                          settings.logistic_tol)
                  .predict(xp);
  } else {
    const auto rows = trial_rows(data);
    if (rows.empty()) throw InsufficientDataError("no trial units");
    fits.pi = learners::fit_logistic_irls(take_rows(xp, rows), take_rows(a, rows), settings.logistic_ridge,
                                          settings.logistic_max_iter, settings.logistic_tol)
                  .predict(xp);
  }

  const auto n_trial = data.count_trial();
  if (!pooled || n_trial == data.n()) {
    fits.eta = VectorXd::Ones(static_cast<Eigen::Index>(data.n()));
  } else {
    if (n_trial == 0) throw InsufficientDataError("no trial units");
    fits.eta = learners::fit_logistic_irls(xp, data.s().cast<double>(), settings.logistic_ridge,
                                           settings.logistic_max_iter, settings.logistic_tol)
                   .predict(xp);
  }
  return fits;
}

NuisanceFits fit_forest_nuisances(const data::TrialDataset& data, const LearnerSettings& settings,
                                  const FeatureViews& views, std::uint64_t seed) {
  using learners::ForestMode;
  const MatrixXd xo = views.outcome_design(data);
  const MatrixXd xp = views.propensity_design(data);
  NuisanceFits fits;
  fits.learner_id = "ranger";
  fits.pooled = true;
  for (int arm : {1, 0}) {
    const auto rows = arm_rows(data, arm, false);
    const auto forest = learners::fit_forest(take_rows(xo, rows), take_rows(data.y(), rows), ForestMode::regression,
                                             settings.forest, derive_seed(seed, static_cast<std::uint64_t>(arm)));
    (arm == 1 ? fits.m1 : fits.m0) = forest.predict(xo);
  }
  fits.pi = learners::clip_probabilities(
      learners::fit_forest(xp, data.a().cast<double>(), ForestMode::probability, settings.forest, derive_seed(seed, 2))
          .predict(xp));
  if (data.count_trial() == data.n()) {
    fits.eta = VectorXd::Ones(static_cast<Eigen::Index>(data.n()));
  } else {
    fits.eta = learners::clip_probabilities(
        learners::fit_forest(xp, data.s().cast<double>(), ForestMode::probability, settings.forest,
                             derive_seed(seed, 3))
            .predict(xp));
  }
  return fits;
}

GpOutcomeModels fit_gp_outcomes(const data::TrialDataset& data, const LearnerSettings& settings,
                                const FeatureViews& views) {
  const MatrixXd xo = views.outcome_design(data);
  auto fit_arm = [&](int arm) {
    const auto rows = arm_rows(data, arm, false);
    if (rows.size() < 2) throw InsufficientDataError("GP outcome model needs >= 2 units in arm " + std::to_string(arm));
    return learners::gp_poly_fit(take_rows(xo, rows), take_rows(data.y(), rows), settings.gp_init);
  };
  return {fit_arm(1), fit_arm(0)};
}

}  // namespace satett::estimators
