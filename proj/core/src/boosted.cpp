#include "imprint/boosted.hpp"

#include <utility>

#include "imprint/errors.hpp"

namespace imprint {

BoostedModel::BoostedModel(const BoostedModel& other)
    : base_prediction(other.base_prediction),
      learning_rate(other.learning_rate),
      train_mse(other.train_mse) {
  trees.reserve(other.trees.size());
  for (const auto& t : other.trees) trees.push_back(clone_tree(*t));
}

BoostedModel& BoostedModel::operator=(const BoostedModel& other) {
  if (this != &other) *this = BoostedModel(other);
  return *this;
}

BoostedModel fit_boosted(const Dataset& ds, const TrainParams& params) {
  validate(params);
  const std::vector<double> y = ds.target_values();
  const auto target_col = ds.target_index();
  if (!target_col) throw DataError("fit_boosted: dataset has no target column");
  const std::size_t target = *target_col;
  const auto feats = ds.feature_indices();
  if (feats.empty()) throw DataError("fit_boosted: no feature columns");

  BoostedModel model;
  model.learning_rate = params.learning_rate;
  model.base_prediction = stable_mean(y);
  model.train_mse.reserve(params.n_trees);

  std::vector<double> current(y.size(), model.base_prediction);
  Dataset work = ds;  // target column is rewritten with residuals each round

  for (std::size_t t = 0; t < params.n_trees; ++t) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      work.set_value(i, target, y[i] - current[i]);
    }
    auto tree = fit_tree(work, params);
    std::vector<double> sq_err(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const auto row = work.feature_row(i);
      current[i] += params.learning_rate * predict_tree(*tree, row);
      const double e = y[i] - current[i];
      sq_err[i] = e * e;
    }
    model.trees.push_back(std::move(tree));
    model.train_mse.push_back(stable_mean(sq_err));
  }
  return model;
}

double predict_boosted(const BoostedModel& model, std::span<const double> row) {
  double out = model.base_prediction;
  for (const auto& tree : model.trees) {
    out += model.learning_rate * predict_tree(*tree, row);
  }
  return out;
}

}  // namespace imprint
