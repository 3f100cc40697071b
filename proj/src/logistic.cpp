#include "satett/logistic.hpp"

#include "satett/error.hpp"
#include "satett/linear.hpp"

#include <algorithm>
#include <cmath>

namespace satett::learners {

namespace {

VectorXd sigmoid(const VectorXd& t) {
  return t.unaryExpr([](double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); });
}

double penalized_loglik(const MatrixXd& design, const VectorXd& y, const VectorXd& beta, double ridge) {
  const VectorXd t = design * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    // log(1 + e^t) computed stably
    const double softplus = t[i] > 0 ? t[i] + std::log1p(std::exp(-t[i])) : std::log1p(std::exp(t[i]));
    ll += y[i] * t[i] - softplus;
  }
  return ll - 0.5 * ridge * beta.squaredNorm();
}

}  // namespace

double clip_probability(double p) { return std::clamp(p, kProbabilityClip, 1.0 - kProbabilityClip); }

VectorXd clip_probabilities(const VectorXd& p) { return p.unaryExpr([](double x) { return clip_probability(x); }); }

VectorXd LogisticModel::predict(const MatrixXd& features) const {
  const VectorXd t = (features * coefficients.tail(coefficients.size() - 1)).array() + coefficients[0];
  return clip_probabilities(sigmoid(t));
}

VectorXd logistic_score(const MatrixXd& features, const VectorXd& labels, const VectorXd& coefficients,
                        double ridge) {
  const MatrixXd design = with_intercept(features);
  return design.transpose() * (labels - sigmoid(design * coefficients)) - ridge * coefficients;
}

LogisticModel fit_logistic_irls(const MatrixXd& features, const VectorXd& labels, double ridge, int max_iter,
                                double tol) {
  if (features.rows() != labels.size() || labels.size() < 1)
    throw InsufficientDataError("fit_logistic_irls needs rows(features) == len(labels) >= 1");
  if (ridge < 0.0) throw DomainError("fit_logistic_irls: ridge must be nonnegative");
  ++fit_counters().logistic;

  const MatrixXd design = with_intercept(features);
  const Eigen::Index k = design.cols();
  LogisticModel model;
  model.ridge = ridge;
  model.coefficients = VectorXd::Zero(k);

  VectorXd beta = VectorXd::Zero(k);
  double objective = penalized_loglik(design, labels, beta, ridge);
  for (int iter = 0; iter < max_iter; ++iter) {
    const VectorXd p = sigmoid(design * beta);
    const VectorXd grad = design.transpose() * (labels - p) - ridge * beta;
    model.gradient_norm = grad.lpNorm<Eigen::Infinity>();
    if (model.gradient_norm <= tol) {
      model.converged = true;
      break;
    }
    const VectorXd w = (p.array() * (1.0 - p.array())).max(1e-12);
    MatrixXd hessian = design.transpose() * w.asDiagonal() * design;
    hessian.diagonal().array() += ridge;
    Eigen::LDLT<MatrixXd> ldlt(hessian);
    VectorXd step = ldlt.solve(grad);
    if (!step.allFinite()) step = grad / std::max(1.0, static_cast<double>(labels.size()));

    double scale = 1.0;
    VectorXd candidate = beta + step;
    double cand_obj = penalized_loglik(design, labels, candidate, ridge);
    // near the optimum the objective change drops below rounding; a smaller
    // score then decides
    auto improves = [&](const VectorXd& b, double obj) {
      if (obj > objective) return true;
      const VectorXd g = design.transpose() * (labels - sigmoid(design * b)) - ridge * b;
      return obj >= objective - 1e-12 * (1.0 + std::abs(objective)) &&
             g.lpNorm<Eigen::Infinity>() < model.gradient_norm;
    };
    bool accepted = improves(candidate, cand_obj);
    for (int halving = 0; halving < 10 && !accepted; ++halving) {
      scale *= 0.5;
      candidate = beta + scale * step;
      cand_obj = penalized_loglik(design, labels, candidate, ridge);
      accepted = improves(candidate, cand_obj);
    }
    model.iterations = iter + 1;
    if (!accepted) break;  // no ascent possible; report current iterate
    beta = candidate;
    objective = cand_obj;
  }
  model.coefficients = beta;
  const VectorXd final_grad = design.transpose() * (labels - sigmoid(design * beta)) - ridge * beta;
  model.gradient_norm = final_grad.lpNorm<Eigen::Infinity>();
  // Without a penalty, separated classes push the linear predictor to
  // saturation and the score vanishes only in the limit: no finite optimum.
  const bool saturated = ridge == 0.0 && (design * beta).cwiseAbs().maxCoeff() > 30.0;
  model.converged = model.gradient_norm <= tol && !saturated;
  return model;
}

}  // namespace satett::learners
