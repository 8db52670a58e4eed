#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "imprint/dataset.hpp"

namespace imprint {

enum class CentralMeasure : std::uint8_t { Mean, Median, TruncatedMean };

const char* measure_name(CentralMeasure m);
CentralMeasure parse_measure(const std::string& name);

/// Keep only rows with zero missing feature cells.
struct CompleteCaseStrategy {};

/// Replace each selected column by its presence bit: observed -> 1,
/// missing -> 0. An empty column list means "every feature column with at
/// least one missing cell at fit time".
struct IndicatorStrategy {
  std::vector<std::string> columns;
};

/// Fill missing cells with a central value of the observed cells, optionally
/// computed within cohorts keyed by another column.
struct CentralStrategy {
  CentralMeasure measure = CentralMeasure::Mean;
  std::optional<std::string> cohort_key;
  double trim = 0.1;  // only used by the truncated mean
};

/// Chained equations: mean-initialize, then sweep columns in ascending index
/// order refitting a least-squares regression per gappy column.
struct MiceStrategy {
  std::size_t max_iter = 10;
  double tol = 1e-3;  // absolute, on columns standardized by observed std
  std::uint64_t seed = 0;  // reserved; the deterministic variant ignores it
};

using ImputationStrategy = std::variant<CompleteCaseStrategy, IndicatorStrategy,
                                        CentralStrategy, MiceStrategy>;

std::string strategy_name(const ImputationStrategy& strategy);

struct MiceSweep {
  double max_change = 0;  // max absolute standardized change across imputed cells
  std::vector<std::size_t> fallback_columns;  // mean-filled due to a singular fit
};

struct MiceTrace {
  std::vector<MiceSweep> sweeps;
  bool converged = false;
  double final_delta = 0;
};

/// A dataset with no missing feature cells plus the record of which cells
/// were fabricated to get there.
struct ImputedDataset {
  Dataset data;
  ProvenanceMask provenance;
  ImputationStrategy strategy;
  std::optional<MiceTrace> trace;  // MICE only
};

struct ImputerFit;

/// Fill state learned from a training set, applicable to new rows without
/// touching their values (no test-set leakage).
class FittedImputer {
public:
  struct CentralState {
    std::optional<std::string> cohort_key;
    std::vector<double> pooled_fill;  // per feature column
    /// cohort value -> per-column fills; NaN marks "no observed cells here".
    std::map<double, std::vector<double>> cohort_fill;
  };
  struct MiceColumnModel {
    double intercept = 0;
    std::vector<double> coefficients;  // over the other feature columns
    bool mean_fallback = false;
  };
  struct MiceState {
    std::vector<double> train_means;  // per feature column
    std::vector<double> train_stds;   // standardization scale, never zero
    std::vector<std::optional<MiceColumnModel>> models;  // per feature column
    std::size_t max_iter = 10;
    double tol = 1e-3;
  };

  ImputedDataset apply(const Dataset& ds) const;
  const ImputationStrategy& strategy() const { return strategy_; }

private:
  friend ImputerFit fit_imputer(const Dataset&, const ImputationStrategy&);

  ImputationStrategy strategy_;
  std::vector<std::string> feature_names_;  // fit-time feature order
  std::vector<std::string> indicator_columns_;
  std::optional<CentralState> central_;
  std::optional<MiceState> mice_;
};

struct ImputerFit {
  ImputedDataset train;  // completion of the data the imputer was fitted on
  FittedImputer imputer;
};

/// Fits the strategy on train and returns both its completion and the
/// reusable fill state. Throws StrategyError on strategy-level failures.
ImputerFit fit_imputer(const Dataset& train, const ImputationStrategy& strategy);

/// One-shot forms: fit on ds and return its completion.
ImputedDataset complete_case(const Dataset& ds);
ImputedDataset indicator_encode(const Dataset& ds,
                                const std::vector<std::string>& columns);
ImputedDataset central_impute(const Dataset& ds, CentralMeasure measure,
                              const std::optional<std::string>& cohort_key = {},
                              double trim = 0.1);
ImputedDataset mice_impute(const Dataset& ds, const MiceStrategy& params);

}  // namespace imprint
