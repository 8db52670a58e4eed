#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include "imprint/dataset.hpp"

namespace imprint {

struct TrainParams {
  std::size_t max_depth = 4;
  std::size_t min_leaf_rows = 5;
  std::size_t n_trees = 100;       // boosted ensembles only
  double learning_rate = 0.1;      // boosted ensembles only
  std::uint64_t seed = 0;          // reserved; fitting is deterministic
};

void validate(const TrainParams& params);

/// Regression tree node. Thresholds are strict midpoints between consecutive
/// distinct observed training values, so observed-value routing never ties.
/// Rows missing the split feature follow default_left, the side that
/// minimized training squared error.
struct TreeNode {
  double value = 0;          // leaf prediction (mean target of its rows)
  std::size_t n_rows = 0;    // training rows that reached this node
  int feature = -1;          // split feature index, -1 for a leaf
  double threshold = 0;
  bool default_left = true;
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;

  bool is_leaf() const { return left == nullptr; }
};

std::unique_ptr<TreeNode> clone_tree(const TreeNode& node);

/// Greedy CART fit by squared-error reduction over midpoint candidates.
/// Missing feature cells are allowed; missing target cells are not.
/// Ties break on lowest feature index, then smallest threshold, and all
/// reductions run in value-sorted order, so the tree is invariant under row
/// permutation.
std::unique_ptr<TreeNode> fit_tree(const Dataset& ds, const TrainParams& params);

/// Routes NaN (missing) cells along the recorded default direction; total
/// over arbitrary missing patterns. Throws MismatchError when the row is too
/// short for a split feature.
double predict_tree(const TreeNode& root, std::span<const double> row);

}  // namespace imprint
