#include "satett/isotonic.hpp"

#include "satett/error.hpp"
#include "satett/logistic.hpp"

#include <algorithm>
#include <numeric>

namespace satett::learners {

std::vector<double> pava(const std::vector<double>& values, const std::vector<double>& weights) {
  struct Block {
    double sum_wy;
    double sum_w;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    blocks.push_back({weights[i] * values[i], weights[i], 1});
    while (blocks.size() >= 2) {
      auto& prev = blocks[blocks.size() - 2];
      const auto& last = blocks.back();
      if (prev.sum_wy / prev.sum_w <= last.sum_wy / last.sum_w) break;
      prev.sum_wy += last.sum_wy;
      prev.sum_w += last.sum_w;
      prev.count += last.count;
      blocks.pop_back();
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.sum_wy / b.sum_w);
  return out;
}

double IsotonicFit::predict(double x) const {
  if (breakpoints.empty()) return 0.0;
  if (x <= breakpoints.front()) return levels.front();
  if (x >= breakpoints.back()) return levels.back();
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  const auto hi = static_cast<std::size_t>(it - breakpoints.begin());
  const auto lo = hi - 1;
  if (x == breakpoints[lo]) return levels[lo];
  const double t = (x - breakpoints[lo]) / (breakpoints[hi] - breakpoints[lo]);
  return levels[lo] + t * (levels[hi] - levels[lo]);
}

VectorXd IsotonicFit::predict(const VectorXd& x) const {
  return x.unaryExpr([this](double xi) { return predict(xi); });
}

IsotonicFit fit_isotonic(const VectorXd& predictor, const VectorXd& labels, const VectorXd& weights) {
  const auto n = predictor.size();
  if (labels.size() != n || weights.size() != n) throw DomainError("fit_isotonic: length mismatch");
  if ((weights.array() <= 0.0).any()) throw DomainError("fit_isotonic: weights must be positive");
  IsotonicFit fit;
  if (n == 0) return fit;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return predictor[i] < predictor[j]; });

  std::vector<double> pooled_y, pooled_w;
  for (std::size_t k = 0; k < order.size();) {
    const double x = predictor[order[k]];
    double swy = 0.0, sw = 0.0;
    for (; k < order.size() && predictor[order[k]] == x; ++k) {
      swy += weights[order[k]] * labels[order[k]];
      sw += weights[order[k]];
    }
    fit.breakpoints.push_back(x);
    pooled_y.push_back(swy / sw);
    pooled_w.push_back(sw);
  }
  fit.levels = pava(pooled_y, pooled_w);
  return fit;
}

IsotonicFit fit_isotonic(const VectorXd& predictor, const VectorXd& labels) {
  return fit_isotonic(predictor, labels, VectorXd::Ones(predictor.size()));
}

VectorXd calibrate_predictions(const VectorXd& raw, const VectorXd& labels, CalibrationKind kind) {
  if (raw.size() != labels.size()) throw DomainError("calibrate_predictions: length mismatch");
  const VectorXd out = fit_isotonic(raw, labels).predict(raw);
  return kind == CalibrationKind::probability ? clip_probabilities(out) : out;
}

}  // namespace satett::learners
