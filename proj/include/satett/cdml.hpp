#pragma once

#include "satett/estimators.hpp"
#include "satett/inference.hpp"

#include <cstdint>

namespace satett::estimators {

/// Uncalibrated nuisance predictions attached to each row: forest outcome
/// models per arm and logistic pi, eta. Computed once and then frozen.
struct CdmlRawPredictions {
  VectorXd m1;
  VectorXd m0;
  VectorXd pi;
  VectorXd eta;

  CdmlRawPredictions select(const std::vector<std::size_t>& rows) const;
};

struct CdmlCalibrated {
  VectorXd m1;
  VectorXd m0;
  VectorXd pi;            ///< pi-hat recalibrated against A
  VectorXd one_minus_pi;  ///< (1 - pi-hat) recalibrated against 1 - A
  VectorXd eta;           ///< eta-hat recalibrated against S
};

CdmlRawPredictions fit_cdml_raw(const data::TrialDataset& data, const LearnerSettings& settings,
                                const FeatureViews& views, std::uint64_t seed);

/// Isotonic recalibration of every raw prediction (probabilities clipped to
/// [1e-6, 1 - 1e-6]; outcomes are not clipped).
CdmlCalibrated calibrate_cdml(const data::TrialDataset& data, const CdmlRawPredictions& raw);

/// Point estimate with weights eta*/pi* and eta*/(1 - pi)*.
AugmentedResult cdml_from_raw(const data::TrialDataset& data, const data::SubgroupTarget& target,
                              const CdmlRawPredictions& raw);

/// Standard deviation of B resampled estimates. Each replicate resamples rows
/// with their frozen raw predictions and reruns calibration and estimation; a
/// resample lacking either arm in the trial subgroup is redrawn, at most 10 B
/// draws in total.
double bootstrap_cdml_se(const data::TrialDataset& data, const data::SubgroupTarget& target,
                         const CdmlRawPredictions& raw, const inference::BootstrapConfig& cfg);

/// Full pipeline: raw fits, calibration, estimate, bootstrap se, Wald summary.
EstimateReport estimate_cdml(const data::TrialDataset& data, const data::SubgroupTarget& target,
                             const LearnerSettings& settings, const FeatureViews& views, std::uint64_t seed,
                             const inference::BootstrapConfig& bootstrap);

}  // namespace satett::estimators
