#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace satett::learners {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class ForestMode { regression, probability };

struct ForestSettings {
  int n_trees = 200;
  int max_depth = 6;
  int min_leaf = 5;
  int mtry = 0;  ///< 0 selects ceil(sqrt(p))
  bool bootstrap = true;
};

struct TreeNode {
  int feature = -1;  ///< -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  int count = 0;  ///< training rows (with bootstrap multiplicity) reaching the node
};

struct Tree {
  std::vector<TreeNode> nodes;
  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

/// Bagged CART ensemble.
///
/// Seed contract: tree t draws from Philox(seed, stream = t); its bootstrap
/// sample is n indices drawn in row order of the training matrix, so permuting
/// rows changes the fit even under the same seed.
struct ForestModel {
  std::vector<Tree> trees;
  std::vector<std::vector<std::size_t>> out_of_bag;
  ForestSettings settings;
  ForestMode mode = ForestMode::regression;
  std::uint64_t seed = 0;

  int n_trees() const { return static_cast<int>(trees.size()); }
  /// Mean over trees; for probability mode this is the class-1 fraction, in [0, 1].
  VectorXd predict(const MatrixXd& features) const;
};

ForestModel fit_forest(const MatrixXd& features, const VectorXd& targets, ForestMode mode,
                       const ForestSettings& settings, std::uint64_t seed);

}  // namespace satett::learners
