#pragma once

// Extremely randomized regression trees. At each node K candidate features
// receive one uniform random cut each and the cut with the largest variance
// reduction is kept. The forest predicts the mean of its trees' leaf values.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mabrl/matrix.hpp"

namespace mabrl {

struct ForestParams {
  std::size_t tree_count = 50;         // M
  std::size_t features_per_split = 0;  // K; 0 means all features
  std::size_t min_samples_split = 5;   // n_min

  void validate(std::size_t feature_dim) const;
};

// Split nodes hold a feature index and cut; their children are stored at
// `left` and `left + 1`. Leaves have feature == -1 and store the mean target.
struct TreeNode {
  std::int32_t feature = -1;
  std::int32_t left = -1;
  double value = 0.0;  // cut point for splits, prediction for leaves

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> row) const;
  std::size_t leaf_count() const;
  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct Forest {
  std::vector<RegressionTree> trees;
  ForestParams params;
  std::size_t feature_dim = 0;
  double target_min = 0.0;
  double target_max = 0.0;

  friend bool operator==(const Forest& a, const Forest& b) {
    return a.trees == b.trees && a.feature_dim == b.feature_dim &&
           a.target_min == b.target_min && a.target_max == b.target_max;
  }
};

Forest fit_forest(const RowMatrix& rows, std::span<const double> targets,
                  const ForestParams& params, std::uint64_t seed);

// Mean of per-tree leaf values, clamped to the training target range.
double predict_forest(const Forest& forest, std::span<const double> row);

void save_forest(const Forest& forest, const std::filesystem::path& path);
Forest load_forest(const std::filesystem::path& path);

}  // namespace mabrl
