#pragma once

#include <Eigen/Dense>

namespace satett::learners {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kProbabilityClip = 1e-6;

double clip_probability(double p);
VectorXd clip_probabilities(const VectorXd& p);

struct LogisticModel {
  VectorXd coefficients;  ///< intercept first
  double ridge = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;  ///< max-norm of the penalized score at `coefficients`

  /// Fitted probabilities clipped to [1e-6, 1 - 1e-6].
  VectorXd predict(const MatrixXd& features) const;
};

/// Ridge-penalized logistic regression by Newton/IRLS with step halving.
///
/// Maximizes sum_i [y_i t_i - log(1 + e^{t_i})] - ridge/2 * |beta|^2 where the
/// penalty covers every coefficient including the intercept, so a single-class
/// label vector still has a finite optimum when ridge > 0. Separation with
/// ridge == 0 is reported through `converged`, never thrown.
LogisticModel fit_logistic_irls(const MatrixXd& features, const VectorXd& labels, double ridge = 0.0,
                                int max_iter = 100, double tol = 1e-8);

/// Penalized score X'(y - p) - ridge * beta on the design with intercept.
VectorXd logistic_score(const MatrixXd& features, const VectorXd& labels, const VectorXd& coefficients,
                        double ridge);

}  // namespace satett::learners
