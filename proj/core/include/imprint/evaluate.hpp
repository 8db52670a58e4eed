#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "imprint/config.hpp"
#include "imprint/dataset.hpp"
#include "imprint/impute.hpp"
#include "imprint/model.hpp"

namespace imprint {

/// Mean absolute error; throws DataError on empty or unequal inputs.
double mae(std::span<const double> predictions, std::span<const double> actuals);
double mse(std::span<const double> predictions, std::span<const double> actuals);

/// The experiment's working data: the (possibly masked) dataset plus the
/// pre-mask original. When nothing was masked the two are identical and
/// masked == false.
struct ExperimentData {
  Dataset data;
  Dataset ground_truth;
  bool masked = false;
};

/// Generates or loads the configured dataset and applies the configured
/// masking, all derived deterministically from config.seed.
ExperimentData load_experiment_data(const ExperimentConfig& config);

/// Per-feature baseline for Shapley coalitions: the mean over cells that were
/// genuinely observed (fill-ins excluded); falls back to the column mean when
/// a feature has no observed cells.
std::vector<double> observed_feature_means(const Dataset& ds, const ProvenanceMask& mask);

/// Observed-cell statistics per feature column, in feature order.
std::vector<ColumnStats> feature_stats(const Dataset& ds);

/// Explainer inputs derived once from the model's completed training data:
/// Shapley baselines (observed-cell means) and LIME perturbation statistics,
/// both in model feature order.
struct ExplainContext {
  std::vector<double> baseline;
  std::vector<ColumnStats> stats;
};

ExplainContext make_explain_context(const Model& model, const Dataset& train,
                                    const ProvenanceMask& train_mask);

/// Explains one row of a completed dataset with the configured explainer.
/// LIME seeds are derived per row from the config seeds.
Explanation explain_row(const Model& model, const ExplainContext& context,
                        const Dataset& ds, const ProvenanceMask& mask, std::size_t row,
                        const ExperimentConfig& config);

/// One cell of the strategy-by-model comparison table.
struct MetricsRow {
  std::string strategy;
  std::string model_family;
  double mae = 0;
  double mse = 0;
  std::size_t n_test = 0;
  bool ok = true;
  std::string error;  // set when ok == false
};

/// Shared-split comparison: per (strategy x model family), fit the imputer
/// on training rows only, apply its fill state to the test rows, train,
/// evaluate. The complete-case strategy is reported as the
/// "no-missing-variables" row: the model sees only feature columns that are
/// fully observed in training. A failing cell is marked failed without
/// aborting its siblings.
std::vector<MetricsRow> run_strategy_comparison(const ExperimentConfig& config);

/// Attribution divergence between a model trained on strategy-imputed data
/// and one trained on the unmasked ground truth, over shared test rows.
struct DriftReport {
  double mean_attribution_diff = 0;
  double rank_correlation = 1;   // mean Spearman rho over explained rows
  double top_k_preserved = 1;    // fraction of rows with identical top-k sets
  std::size_t n_rows_explained = 0;
  std::size_t warning_count = 0;  // imputed-in-top-k warnings on the imputed side
};

DriftReport explanation_drift(const ExperimentConfig& config,
                              const ImputationStrategy& strategy);

struct GroupStats {
  double group = 0;  // group label value
  std::size_t n = 0;
  double mae = 0;
  double mean_signed_error = 0;  // mean(prediction - actual)
};

struct GroupFairnessReport {
  std::vector<GroupStats> groups;  // ascending by label
  double disparity = 0;  // max pairwise |mean signed error| difference
};

/// Throws DataError with fewer than two groups.
GroupFairnessReport group_disparity(std::span<const double> predictions,
                                    std::span<const double> actuals,
                                    std::span<const double> group_labels);

/// Paired fairness run: the configured group-driven MAR masking versus MCAR
/// at the matched overall rate, same pipeline otherwise.
struct FairnessComparison {
  GroupFairnessReport mar;
  GroupFairnessReport mcar;
  double matched_rate = 0;  // MCAR rate used for the pairing
};

FairnessComparison fairness_comparison(const ExperimentConfig& config);

/// Paired missingness-shift run: a model trained on masked data is scored on
/// a test set masked at the training rate and on one masked at factor times
/// that rate.
struct ShiftReport {
  double mae_matched = 0;
  double mae_shifted = 0;
  double train_rate = 0;
  double shifted_rate = 0;
};

ShiftReport missingness_shift(const ExperimentConfig& config);

void write_metrics_csv(std::span<const MetricsRow> rows, std::ostream& out);
/// Aligned text table with the Model | MAE | MSE layout.
std::string format_metrics_table(std::span<const MetricsRow> rows);
void write_drift_csv(const DriftReport& report, std::ostream& out);
void write_fairness_csv(const FairnessComparison& report, std::ostream& out);
void write_shift_csv(const ShiftReport& report, std::ostream& out);

}  // namespace imprint
