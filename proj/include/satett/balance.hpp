#pragma once

#include "satett/data.hpp"
#include "satett/gp.hpp"

#include <vector>

namespace satett::estimators {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Symmetric PSD matrix Q = dense + F F' + diag(d). Either part may be empty.
struct QuadraticForm {
  MatrixXd dense;
  MatrixXd factor;
  VectorXd diag;

  Eigen::Index size() const;
  VectorXd apply(const VectorXd& x) const;
  MatrixXd to_dense() const;
  /// Solves Q[F, F] z = rhs for the index subset F.
  VectorXd solve_subset(const std::vector<Eigen::Index>& subset, const VectorXd& rhs) const;
};

struct QpResult {
  VectorXd x;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes x'Qx - 2c'x subject to x >= 0 by accelerated projected gradient
/// with adaptive restart, finishing with an exact solve on the support when
/// that satisfies the KKT conditions.
QpResult solve_nonneg_qp(const QuadraticForm& q, const VectorXd& c, double tol = 1e-8, int max_iter = 50000);

/// Largest violation of the KKT conditions of the problem above, measured on
/// g = Qx - c: max over i of |g_i| when x_i > 0 and max(0, -g_i) when x_i = 0.
double kkt_residual(const QuadraticForm& q, const VectorXd& c, const VectorXd& x);

/// Balancing problem over the units with V = v. Unknowns are indexed by
/// `active` (treated units with V = v first, then controls with V = v).
struct BalanceProblem {
  std::vector<std::size_t> active;
  std::size_t n_treated = 0;  ///< leading entries of `active` with A = 1
  QuadraticForm q;
  VectorXd c;
  VectorXd penalty;  ///< lambda * sigma2 of each active unit's arm
  double imbalance_offset = 0.0;  ///< sum over arms of e' K_a e
  double lambda = 0.01;
};

/// Sum over arms of (I_a x - e)' K_a (I_a x - e), with x indexed like `active`.
double balance_imbalance(const BalanceProblem& problem, const VectorXd& x);

/// Builds Q = I_A K_1 I_A + I_{1-A} K_0 I_{1-A} + lambda Sigma and c from the
/// fitted outcome GPs, restricted to the V = v units. K_a is the signal part of
/// arm a's kernel on the outcome design; Sigma holds each arm's noise variance.
BalanceProblem build_balance_problem(const data::TrialDataset& data, const data::SubgroupTarget& target,
                                     const MatrixXd& design, const learners::GpPolyModel& gp1,
                                     const learners::GpPolyModel& gp0, double lambda = 0.01);

struct BalanceWeights {
  VectorXd gamma;  ///< length n, zero off the active set
  double objective = 0.0;
  double imbalance = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

BalanceWeights solve_balance_weights(const BalanceProblem& problem, std::size_t n, double tol = 1e-8,
                                     int max_iter = 50000);

}  // namespace satett::estimators
