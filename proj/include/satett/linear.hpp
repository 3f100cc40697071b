#pragma once

#include <Eigen/Dense>

namespace satett::learners {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Prepends a column of ones.
MatrixXd with_intercept(const MatrixXd& features);

struct LinearModel {
  VectorXd coefficients;  ///< intercept first
  double ridge = 0.0;

  VectorXd predict(const MatrixXd& features) const;
};

/// Least squares with an optional ridge penalty on the slopes (never the intercept).
/// Throws RankDeficiencyError when ridge == 0 and the design is rank deficient.
LinearModel fit_ols(const MatrixXd& features, const VectorXd& targets, double ridge = 0.0);

/// Per-thread counts of model fits; lets callers verify that a pipeline stage
/// reuses frozen predictions instead of refitting.
struct FitCounters {
  long ols = 0;
  long logistic = 0;
  long forest = 0;
  long gp = 0;
};

FitCounters& fit_counters();

}  // namespace satett::learners
