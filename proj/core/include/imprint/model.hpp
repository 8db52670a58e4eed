#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "imprint/boosted.hpp"
#include "imprint/dataset.hpp"
#include "imprint/linear.hpp"
#include "imprint/tree.hpp"

namespace imprint {

enum class ModelFamily : std::uint8_t { Linear, Tree, Boosted };

const char* family_name(ModelFamily family);
ModelFamily parse_family(const std::string& name);

/// A fitted predictor plus the feature schema it was trained on. predict()
/// matches columns by name, so applying a model to a differently-shaped
/// dataset raises MismatchError instead of silently misreading columns.
class Model {
public:
  Model() = default;
  Model(LinearModel m, std::vector<std::string> feature_names, std::string target_name);
  Model(std::unique_ptr<TreeNode> root, std::vector<std::string> feature_names,
        std::string target_name);
  Model(BoostedModel m, std::vector<std::string> feature_names, std::string target_name);

  ModelFamily family() const;
  std::size_t n_features() const { return feature_names_.size(); }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::string& target_name() const { return target_name_; }

  /// Row in training feature order; NaN marks a missing cell (trees route it
  /// along the default direction, the linear family rejects it).
  double predict_row(std::span<const double> row) const;

  /// Predicts every row of ds after checking its feature schema.
  std::vector<double> predict(const Dataset& ds) const;

  /// Maps ds's columns onto the training feature order; MismatchError when a
  /// training feature is absent.
  std::vector<std::size_t> feature_mapping(const Dataset& ds) const;

  const LinearModel* linear() const;
  const TreeNode* tree() const;
  const BoostedModel* boosted() const;

  /// Self-describing text format with shortest round-trip numbers, intended
  /// for bit-exact reload.
  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static Model load(std::istream& in);
  static Model load_file(const std::string& path);

private:
  struct TreeHolder {  // copyable wrapper over the unique_ptr root
    std::unique_ptr<TreeNode> root;
    TreeHolder() = default;
    explicit TreeHolder(std::unique_ptr<TreeNode> r) : root(std::move(r)) {}
    TreeHolder(const TreeHolder& o) : root(o.root ? clone_tree(*o.root) : nullptr) {}
    TreeHolder& operator=(const TreeHolder& o);
    TreeHolder(TreeHolder&&) = default;
    TreeHolder& operator=(TreeHolder&&) = default;
  };

  std::variant<LinearModel, TreeHolder, BoostedModel> impl_;
  std::vector<std::string> feature_names_;
  std::string target_name_;
};

/// Fits the requested family on ds (features must be complete for Linear).
Model fit_model(const Dataset& ds, ModelFamily family, const TrainParams& params);

}  // namespace imprint
