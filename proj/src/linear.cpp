#include "satett/linear.hpp"

#include "satett/error.hpp"

namespace satett::learners {

FitCounters& fit_counters() {
  thread_local FitCounters counters;
  return counters;
}

MatrixXd with_intercept(const MatrixXd& features) {
  MatrixXd out(features.rows(), features.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(features.cols()) = features;
  return out;
}

VectorXd LinearModel::predict(const MatrixXd& features) const {
  return (features * coefficients.tail(coefficients.size() - 1)).array() + coefficients[0];
}

LinearModel fit_ols(const MatrixXd& features, const VectorXd& targets, double ridge) {
  if (features.rows() != targets.size() || targets.size() < 1)
    throw InsufficientDataError("fit_ols needs rows(features) == len(targets) >= 1");
  if (ridge < 0.0) throw DomainError("fit_ols: ridge must be nonnegative");
  ++fit_counters().ols;

  const MatrixXd design = with_intercept(features);
  LinearModel model;
  model.ridge = ridge;
  if (ridge == 0.0) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
    if (qr.rank() < design.cols()) {
      throw RankDeficiencyError("fit_ols: design has rank " + std::to_string(qr.rank()) + " < " +
                                std::to_string(design.cols()) + " columns; use ridge > 0");
    }
    model.coefficients = qr.solve(targets);
    return model;
  }
  MatrixXd gram = design.transpose() * design;
  gram.diagonal().tail(gram.cols() - 1).array() += ridge;
  model.coefficients = gram.ldlt().solve(design.transpose() * targets);
  return model;
}

}  // namespace satett::learners
