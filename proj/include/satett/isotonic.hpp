#pragma once

#include <Eigen/Dense>

#include <vector>

namespace satett::learners {

using Eigen::VectorXd;

/// Nondecreasing step fit produced by pool-adjacent-violators.
///
/// `breakpoints` are the distinct predictor values in ascending order and
/// `levels` the fitted value at each. Between breakpoints the fit is linearly
/// interpolated; outside the range it is held constant.
struct IsotonicFit {
  std::vector<double> breakpoints;
  std::vector<double> levels;

  double predict(double x) const;
  VectorXd predict(const VectorXd& x) const;
};

/// Weighted isotonic regression of labels on predictor. Tied predictor values
/// are pooled (weighted mean) before the violators pass.
IsotonicFit fit_isotonic(const VectorXd& predictor, const VectorXd& labels, const VectorXd& weights);
IsotonicFit fit_isotonic(const VectorXd& predictor, const VectorXd& labels);

/// Pool-adjacent-violators on an already ordered sequence; returns one level per input.
std::vector<double> pava(const std::vector<double>& values, const std::vector<double>& weights);

enum class CalibrationKind { probability, real };

/// Isotonic recalibration: regress labels on raw predictions and map each raw
/// prediction through the fit. Probability outputs are clipped to [1e-6, 1 - 1e-6].
VectorXd calibrate_predictions(const VectorXd& raw, const VectorXd& labels,
                               CalibrationKind kind = CalibrationKind::probability);

}  // namespace satett::learners
