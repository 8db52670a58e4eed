#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imprint/dataset.hpp"
#include "imprint/model.hpp"

namespace imprint {

/// One row of an explanation table: the value the model actually consumed,
/// its attributed importance, and whether that value was fabricated.
struct Attribution {
  std::string feature;
  std::size_t feature_index = 0;  // position in the model's feature order
  double value_used = 0;
  double importance = 0;
  bool imputed = false;
};

struct ImputedWarning {
  std::size_t top_k = 0;
  std::vector<std::string> features;  // imputed features among the top k
};

/// Ordered feature attributions for one prediction. attributions are sorted
/// by descending |importance| (ties on feature index). For Shapley
/// explanations, sum(importance) = model_output - baseline_value within
/// floating tolerance.
struct Explanation {
  std::vector<Attribution> attributions;
  double baseline_value = 0;
  double model_output = 0;
  std::optional<ImputedWarning> warning;
};

struct LimeParams {
  std::size_t n_samples = 1000;
  double kernel_width = 0;  // <= 0 means the default 0.75 * sqrt(n_features)
  double perturbation_std_scale = 1.0;
  std::uint64_t seed = 0;
};

/// Per-feature origin tags for the explained row, in model feature order.
using OriginRow = std::vector<CellOrigin>;

/// Exact Shapley values by coalition enumeration (feature count <= 16).
/// Coalition members take the explained row's value, the rest the baseline.
/// Satisfies efficiency, symmetry and dummy; summation order is fixed.
Explanation shapley_exact(const Model& model, std::span<const double> row,
                          std::span<const double> baseline,
                          const OriginRow& provenance, std::size_t top_k = 5);

/// Local linear surrogate: gaussian perturbations around the row, kernel
/// weights on standardized distance, weighted least squares; importances are
/// surrogate coefficients scaled by feature std. Deterministic per seed.
/// A zero-std feature gets importance 0; a singular weighted design raises
/// DataError (callers may raise n_samples).
Explanation lime_local(const Model& model, std::span<const double> row,
                       std::span<const ColumnStats> stats, const LimeParams& params,
                       const OriginRow& provenance, std::size_t top_k = 5);

/// Re-stamps imputed flags from provenance and sets the warning iff any of
/// the top_k attributions by |importance| is imputed or indicator-derived.
Explanation stamp_provenance(Explanation explanation, const OriginRow& provenance,
                             std::size_t top_k);

/// Four-column table (Feature, Value, Importance, Imputed) plus a trailing
/// warning comment line when the warning is set.
void write_explanation_csv(const Explanation& explanation, std::ostream& out);

/// Aligned plain-text rendering of the same table.
std::string format_explanation_table(const Explanation& explanation);

}  // namespace imprint
