#pragma once

#include <memory>
#include <span>
#include <vector>

#include "imprint/tree.hpp"

namespace imprint {

/// Gradient-boosted regression trees with shrinkage. prediction =
/// base_prediction + learning_rate * sum of tree outputs. Deterministic:
/// no row or column subsampling.
struct BoostedModel {
  double base_prediction = 0;
  double learning_rate = 0.1;
  std::vector<std::unique_ptr<TreeNode>> trees;
  std::vector<double> train_mse;  // training loss after each tree

  BoostedModel() = default;
  BoostedModel(BoostedModel&&) = default;
  BoostedModel& operator=(BoostedModel&&) = default;
  BoostedModel(const BoostedModel& other);
  BoostedModel& operator=(const BoostedModel& other);
};

/// base = mean target, then each tree fits the current residuals.
BoostedModel fit_boosted(const Dataset& ds, const TrainParams& params);

double predict_boosted(const BoostedModel& model, std::span<const double> row);

}  // namespace imprint
