#pragma once

#include <Eigen/Dense>

namespace satett::learners {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Polynomial kernel K(z, z') = C (z'z')^d1 + sigma2 * delta(z, z').
struct KernelConfig {
  double C = 1.0;
  int d1 = 1;
  double sigma2 = 1.0;
  double jitter = 1e-8;

  void check() const;
};

/// Gaussian-process regression with the polynomial kernel.
///
/// Inputs are standardized per column (constant columns are only centered) and
/// an intercept feature 1 is appended, so the degree-1 kernel spans affine
/// functions. The kernel has the finite feature map phi(z) = z^{(x) d1}, which
/// keeps likelihood and posterior evaluations at O(n D^2).
class GpPolyModel {
public:
  GpPolyModel(KernelConfig config, VectorXd mean, VectorXd scale, VectorXd weights, double log_marginal_likelihood);

  const KernelConfig& config() const { return config_; }
  double log_marginal_likelihood() const { return lml_; }

  /// Standardized inputs with the intercept column appended.
  MatrixXd standardize(const MatrixXd& features) const;
  /// Explicit polynomial feature map of standardized inputs (unscaled by C).
  MatrixXd feature_map(const MatrixXd& features) const;
  /// Posterior mean.
  VectorXd predict(const MatrixXd& features) const;

private:
  KernelConfig config_;
  VectorXd mean_;
  VectorXd scale_;
  VectorXd weights_;
  double lml_;
};

/// Tensor-power feature map of rows: row_i^{(x) degree}.
MatrixXd polynomial_features(const MatrixXd& z, int degree);

/// Log marginal likelihood of targets under K = C Phi Phi' + (sigma2 + jitter) I.
/// Jitter escalates by 10x up to 1e-4 when the factorization fails; beyond that
/// a ConditioningError is thrown.
double gp_log_marginal_likelihood(const MatrixXd& phi, const VectorXd& targets, const KernelConfig& config);

/// Maximizes the log marginal likelihood over (C, sigma2): a 9 x 9 log-spaced
/// grid C in [1e-2, 1e2], sigma2 in [1e-3, 1e1], then a refinement at half the
/// spacing that moves to the best of the 8 neighbors until none improves, so the
/// result is a local maximizer on the quarter-decade lattice. `init` supplies d1
/// and jitter.
GpPolyModel gp_poly_fit(const MatrixXd& features, const VectorXd& targets, const KernelConfig& init = {});

/// Model with fixed hyperparameters (no search).
GpPolyModel gp_poly_condition(const MatrixXd& features, const VectorXd& targets, const KernelConfig& config);

}  // namespace satett::learners
