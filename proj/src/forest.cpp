#include "satett/forest.hpp"

#include "satett/error.hpp"
#include "satett/linear.hpp"
#include "satett/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace satett::learners {

namespace {

struct Builder {
  const MatrixXd& x;
  const VectorXd& y;
  const ForestSettings& settings;
  int mtry;
  Philox& rng;
  Tree tree;
  std::vector<int> features;

  int grow(std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double sum = 0.0;
    for (auto r : rows) sum += y[static_cast<Eigen::Index>(r)];
    const auto count = static_cast<int>(rows.size());
    tree.nodes[static_cast<std::size_t>(id)].value = sum / count;
    tree.nodes[static_cast<std::size_t>(id)].count = count;

    if (depth >= settings.max_depth || count < 2 * settings.min_leaf) return id;
    const double first = y[static_cast<Eigen::Index>(rows.front())];
    if (std::all_of(rows.begin(), rows.end(), [&](auto r) { return y[static_cast<Eigen::Index>(r)] == first; }))
      return id;

    // Partial Fisher-Yates for the candidate features at this node.
    const int p = static_cast<int>(features.size());
    for (int k = 0; k < mtry; ++k) {
      const int j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(p - k)));
      std::swap(features[static_cast<std::size_t>(k)], features[static_cast<std::size_t>(j)]);
    }

    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    const double parent = sum * sum / count;
    std::vector<std::size_t> sorted = rows;
    for (int k = 0; k < mtry; ++k) {
      const int f = features[static_cast<std::size_t>(k)];
      std::stable_sort(sorted.begin(), sorted.end(), [&](auto a, auto b) {
        return x(static_cast<Eigen::Index>(a), f) < x(static_cast<Eigen::Index>(b), f);
      });
      double left_sum = 0.0;
      for (int i = 0; i + 1 < count; ++i) {
        left_sum += y[static_cast<Eigen::Index>(sorted[static_cast<std::size_t>(i)])];
        const int n_left = i + 1;
        const int n_right = count - n_left;
        if (n_left < settings.min_leaf) continue;
        if (n_right < settings.min_leaf) break;
        const double xl = x(static_cast<Eigen::Index>(sorted[static_cast<std::size_t>(i)]), f);
        const double xr = x(static_cast<Eigen::Index>(sorted[static_cast<std::size_t>(i + 1)]), f);
        if (xl == xr) continue;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / n_left + right_sum * right_sum / n_right - parent;
        if (gain > best_gain * (1.0 + 1e-12) + 1e-12) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (xl + xr);
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : rows) {
      (x(static_cast<Eigen::Index>(r), best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int left = grow(left_rows, depth + 1);
    const int right = grow(right_rows, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left;
    node.right = right;
    return id;
  }
};

}  // namespace

double Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int id = 0;
  while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
    const auto& node = nodes[static_cast<std::size_t>(id)];
    id = row[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(id)].value;
}

VectorXd ForestModel::predict(const MatrixXd& features) const {
  VectorXd out = VectorXd::Zero(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    double acc = 0.0;
    for (const auto& tree : trees) acc += tree.predict(features.row(i));
    out[i] = acc / static_cast<double>(trees.size());
  }
  return out;
}

ForestModel fit_forest(const MatrixXd& features, const VectorXd& targets, ForestMode mode,
                       const ForestSettings& settings, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (static_cast<std::size_t>(targets.size()) != n) throw DomainError("fit_forest: length mismatch");
  if (settings.min_leaf < 1 || settings.n_trees < 1 || settings.max_depth < 0)
    throw DomainError("fit_forest: invalid settings");
  if (n < 2 * static_cast<std::size_t>(settings.min_leaf))
    throw InsufficientDataError("fit_forest: need at least 2*min_leaf = " + std::to_string(2 * settings.min_leaf) +
                                " rows, got " + std::to_string(n));
  if (features.cols() < 1) throw DomainError("fit_forest: need at least one feature");
  if (mode == ForestMode::probability && ((targets.array() != 0.0) && (targets.array() != 1.0)).any())
    throw DomainError("fit_forest: probability mode needs 0/1 targets");
  ++fit_counters().forest;

  const int p = static_cast<int>(features.cols());
  const int mtry = settings.mtry > 0 ? std::min(settings.mtry, p) : static_cast<int>(std::ceil(std::sqrt(p)));

  ForestModel model;
  model.settings = settings;
  model.mode = mode;
  model.seed = seed;
  model.trees.reserve(static_cast<std::size_t>(settings.n_trees));
  for (int t = 0; t < settings.n_trees; ++t) {
    Philox rng(seed, static_cast<std::uint64_t>(t));
    std::vector<std::size_t> rows(n);
    std::vector<char> drawn(n, 0);
    if (settings.bootstrap) {
      for (auto& r : rows) {
        r = static_cast<std::size_t>(rng.below(n));
        drawn[r] = 1;
      }
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      std::fill(drawn.begin(), drawn.end(), 1);
    }
    std::vector<std::size_t> oob;
    for (std::size_t i = 0; i < n; ++i)
      if (!drawn[i]) oob.push_back(i);

    Builder builder{features, targets, settings, mtry, rng, {}, {}};
    builder.features.resize(static_cast<std::size_t>(p));
    std::iota(builder.features.begin(), builder.features.end(), 0);
    builder.grow(rows, 0);
    model.trees.push_back(std::move(builder.tree));
    model.out_of_bag.push_back(std::move(oob));
  }
  return model;
}

}  // namespace satett::learners
