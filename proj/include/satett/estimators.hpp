#pragma once

#include "satett/balance.hpp"
#include "satett/data.hpp"
#include "satett/inference.hpp"
#include "satett/nuisance.hpp"

#include <string>

namespace satett::estimators {

struct EstimateReport {
  double estimate = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  double alpha_hat = 0.0;
  double max_weight = 0.0;
  std::string method_id;
  bool converged = true;  ///< false when an inner solver stopped early
};

/// Point estimate and EIF of the augmented estimator
///   (1 / (alpha n)) sum [1(A=1,V=v) w1 (Y - m1) - 1(A=0,V=v) w0 (Y - m0) + 1(V=v,S=1) (m1 - m0)]
/// with alpha the sample share of (V = v, S = 1). Weights are per unit and are
/// only read where the indicator is nonzero.
struct AugmentedResult {
  double estimate = 0.0;
  double alpha_hat = 0.0;
  double max_weight = 0.0;
  inference::EifContributions eif;
};

AugmentedResult augmented_estimate(const data::TrialDataset& data, const data::SubgroupTarget& target,
                                   const VectorXd& m1, const VectorXd& m0, const VectorXd& w1, const VectorXd& w0);

/// Fills se from the EIF and the Wald summary.
EstimateReport report_from_eif(const AugmentedResult& result, const std::string& method_id);
/// Fills the Wald summary for a given se.
EstimateReport make_report(double estimate, double se, double alpha_hat, double max_weight,
                           const std::string& method_id);

/// Difference in trial-subgroup arm means with the two-sample standard error.
EstimateReport estimate_naive(const data::TrialDataset& data, const data::SubgroupTarget& target);

/// Trial-only augmented estimator; `fits` must come from S = 1 rows.
EstimateReport estimate_cov_adj(const data::TrialDataset& data, const data::SubgroupTarget& target,
                                const NuisanceFits& fits);
/// Fits trial-only linear/logistic nuisances, then estimates.
EstimateReport estimate_cov_adj(const data::TrialDataset& data, const data::SubgroupTarget& target,
                                const LearnerSettings& settings, const FeatureViews& views = {});

/// External-data doubly robust estimator with weights eta/pi and eta/(1 - pi).
/// pi is clipped to [1e-6, 1 - 1e-6] and eta to [1e-6, 1].
EstimateReport estimate_dr(const data::TrialDataset& data, const data::SubgroupTarget& target,
                           const NuisanceFits& fits, const std::string& method_id = "dr");

/// Balancing weights in both weight slots; m from the GP outcome models.
EstimateReport estimate_covbal(const data::TrialDataset& data, const data::SubgroupTarget& target,
                               const BalanceWeights& weights, const NuisanceFits& fits);

struct RieszFit;
/// Signed representer: w1 = gamma* on treated units and w0 = -gamma* on controls.
EstimateReport estimate_autodml(const data::TrialDataset& data, const data::SubgroupTarget& target,
                                const RieszFit& riesz, const NuisanceFits& fits);

}  // namespace satett::estimators
