#include "imprint/impute.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "imprint/errors.hpp"
#include "imprint/text.hpp"

namespace imprint {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_feature_schema(const std::vector<std::string>& fitted,
                          const Dataset& ds) {
  if (ds.feature_names() != fitted) {
    throw MismatchError("imputer was fitted on a different feature set");
  }
}

double central_value(const ColumnStats& stats, CentralMeasure measure) {
  switch (measure) {
    case CentralMeasure::Mean: return stats.mean;
    case CentralMeasure::Median: return stats.median;
    case CentralMeasure::TruncatedMean: return stats.truncated_mean;
  }
  return stats.mean;
}

/// Measure over the observed entries of `values` (NaN = missing); NaN when
/// nothing is observed.
double central_of(std::vector<double> values, CentralMeasure measure, double trim) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (measure == CentralMeasure::Median) {
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  }
  std::size_t drop = 0;
  if (measure == CentralMeasure::TruncatedMean) {
    drop = static_cast<std::size_t>(std::floor(trim * static_cast<double>(n)));
    if (2 * drop >= n) drop = 0;
  }
  double sum = 0;
  for (std::size_t i = drop; i < n - drop; ++i) sum += values[i];
  return sum / static_cast<double>(n - 2 * drop);
}

}  // namespace

const char* measure_name(CentralMeasure m) {
  switch (m) {
    case CentralMeasure::Mean: return "mean";
    case CentralMeasure::Median: return "median";
    case CentralMeasure::TruncatedMean: return "truncated-mean";
  }
  return "mean";
}

CentralMeasure parse_measure(const std::string& name) {
  if (name == "mean") return CentralMeasure::Mean;
  if (name == "median") return CentralMeasure::Median;
  if (name == "truncated-mean") return CentralMeasure::TruncatedMean;
  throw ConfigError("unknown central measure '" + name + "'");
}

std::string strategy_name(const ImputationStrategy& strategy) {
  if (std::holds_alternative<CompleteCaseStrategy>(strategy)) return "complete-case";
  if (std::holds_alternative<IndicatorStrategy>(strategy)) return "indicator";
  if (const auto* c = std::get_if<CentralStrategy>(&strategy)) {
    std::string name = std::string("central-") + measure_name(c->measure);
    if (c->cohort_key) name += "-by-" + *c->cohort_key;
    return name;
  }
  return "mice";
}

// ---------------------------------------------------------------------------
// complete case

namespace {

std::vector<std::size_t> complete_rows(const Dataset& ds) {
  const auto feats = ds.feature_indices();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    bool complete = true;
    for (std::size_t j : feats) {
      if (ds.is_missing(i, j)) {
        complete = false;
        break;
      }
    }
    if (complete) keep.push_back(i);
  }
  return keep;
}

ImputedDataset apply_complete_case(const Dataset& ds) {
  auto keep = complete_rows(ds);
  if (keep.empty()) {
    throw StrategyError("complete-case: every row has at least one missing feature cell");
  }
  ImputedDataset out;
  out.data = ds.select_rows(keep);
  out.provenance = ProvenanceMask(keep.size(), ds.n_cols());
  out.provenance.set_strategy("complete-case");
  out.strategy = CompleteCaseStrategy{};
  return out;
}

// ---------------------------------------------------------------------------
// indicator encoding

ImputedDataset apply_indicator(const Dataset& ds, const std::vector<std::string>& columns) {
  std::vector<std::size_t> selected;
  selected.reserve(columns.size());
  for (const auto& name : columns) {
    const std::size_t j = ds.require_column(name);
    if (ds.column(j).role != ColumnRole::Feature) {
      throw StrategyError("indicator: column '" + name + "' is not a feature column");
    }
    selected.push_back(j);
  }
  std::sort(selected.begin(), selected.end());

  for (std::size_t j : ds.feature_indices()) {
    if (std::find(selected.begin(), selected.end(), j) == selected.end() &&
        !ds.fully_observed(j)) {
      throw StrategyError("indicator: unselected feature column '" + ds.column(j).name +
                          "' still contains missing cells");
    }
  }

  ImputedDataset out;
  out.data = ds;
  out.provenance = ProvenanceMask(ds.n_rows(), ds.n_cols());
  out.provenance.set_strategy("indicator");
  out.strategy = IndicatorStrategy{columns};

  for (std::size_t j : selected) {
    // re-encoding an already encoded column is the identity
    if (ds.column(j).transform == ColumnTransform::Indicator && ds.fully_observed(j)) {
      continue;
    }
    out.data.column(j).transform = ColumnTransform::Indicator;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      if (ds.is_missing(i, j)) {
        out.data.set_value(i, j, 0.0);
        out.provenance.set_origin(i, j, CellOrigin::Indicator);
      } else {
        out.data.set_value(i, j, 1.0);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// central values

std::string cohort_id(double value) { return format_double(value); }

}  // namespace

// fills per feature column from the fitted state, applied to any dataset
ImputedDataset apply_central_state(const FittedImputer::CentralState& state,
                                   const ImputationStrategy& strategy,
                                   const Dataset& ds) {
  const auto feats = ds.feature_indices();
  ImputedDataset out;
  out.data = ds;
  out.provenance = ProvenanceMask(ds.n_rows(), ds.n_cols());
  out.provenance.set_strategy(strategy_name(strategy));
  out.strategy = strategy;

  std::size_t cohort_col = 0;
  if (state.cohort_key) cohort_col = ds.require_column(*state.cohort_key);

  for (std::size_t k = 0; k < feats.size(); ++k) {
    const std::size_t j = feats[k];
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      if (!ds.is_missing(i, j)) continue;
      double fill;
      if (state.cohort_key) {
        if (ds.is_missing(i, cohort_col)) {
          throw StrategyError("central: cohort key '" + *state.cohort_key +
                              "' is missing at row " + std::to_string(i));
        }
        const double key = ds.value(i, cohort_col);
        auto it = state.cohort_fill.find(key);
        if (it == state.cohort_fill.end() || std::isnan(it->second[k])) {
          throw StrategyError("central: cohort " + cohort_id(key) +
                              " has no observed cells for column '" +
                              ds.column(j).name + "'");
        }
        fill = it->second[k];
      } else {
        fill = state.pooled_fill[k];
      }
      out.data.set_value(i, j, fill);
      out.provenance.set_origin(i, j, CellOrigin::Imputed);
    }
  }
  return out;
}

namespace {

FittedImputer::CentralState fit_central_state(const Dataset& ds,
                                              const CentralStrategy& strategy) {
  if (strategy.trim < 0 || strategy.trim >= 0.5) {
    throw StrategyError("central: trim must be in [0, 0.5)");
  }
  const auto feats = ds.feature_indices();
  FittedImputer::CentralState state;
  state.cohort_key = strategy.cohort_key;

  for (std::size_t j : feats) {
    if (ds.observed_values(j).empty()) {
      throw StrategyError("central: column '" + ds.column(j).name +
                          "' has no observed cells");
    }
    auto stats = column_stats(ds, j, strategy.trim);
    state.pooled_fill.push_back(central_value(stats, strategy.measure));
  }

  if (strategy.cohort_key) {
    const std::size_t cohort_col = ds.require_column(*strategy.cohort_key);
    if (!ds.fully_observed(cohort_col)) {
      throw StrategyError("central: cohort key column '" + *strategy.cohort_key +
                          "' has missing cells");
    }
    std::vector<double> keys;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) keys.push_back(ds.value(i, cohort_col));
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    for (double key : keys) {
      std::vector<double> fills(feats.size(), kNaN);
      for (std::size_t k = 0; k < feats.size(); ++k) {
        std::vector<double> within;
        for (std::size_t i = 0; i < ds.n_rows(); ++i) {
          if (ds.value(i, cohort_col) != key) continue;
          within.push_back(ds.is_missing(i, feats[k]) ? kNaN : ds.value(i, feats[k]));
        }
        fills[k] = central_of(std::move(within), strategy.measure, strategy.trim);
      }
      state.cohort_fill.emplace(key, std::move(fills));
    }
  }
  return state;
}

// ---------------------------------------------------------------------------
// MICE

struct LsqFit {
  double intercept = 0;
  std::vector<double> coefficients;
  bool ok = false;
};

/// Least squares of y on the given predictor columns of `work` with an
/// intercept; ok=false when the design is rank deficient.
LsqFit solve_least_squares(const std::vector<std::vector<double>>& work,
                           const std::vector<std::size_t>& rows,
                           const std::vector<std::size_t>& predictors,
                           const std::vector<double>& y) {
  const std::size_t n = rows.size();
  const std::size_t p = predictors.size() + 1;
  LsqFit fit;
  if (n < p) return fit;

  Eigen::MatrixXd a(n, p);
  Eigen::VectorXd b(n);
  for (std::size_t r = 0; r < n; ++r) {
    a(r, 0) = 1.0;
    for (std::size_t c = 0; c < predictors.size(); ++c) {
      a(r, c + 1) = work[rows[r]][predictors[c]];
    }
    b(r) = y[r];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < static_cast<Eigen::Index>(p)) return fit;
  Eigen::VectorXd beta = qr.solve(b);
  fit.intercept = beta(0);
  fit.coefficients.assign(beta.data() + 1, beta.data() + p);
  fit.ok = true;
  return fit;
}

double predict_lsq(const FittedImputer::MiceColumnModel& model,
                   const std::vector<double>& others) {
  double v = model.intercept;
  for (std::size_t c = 0; c < others.size(); ++c) v += model.coefficients[c] * others[c];
  return v;
}

struct MiceFitOutput {
  std::vector<std::vector<double>> work;  // completed feature matrix
  FittedImputer::MiceState state;
  MiceTrace trace;
};

/// Chained-equations sweeps over the feature matrix. `missing` marks the
/// originally-missing cells to refresh; rows where a column is observed are
/// the regression rows.
MiceFitOutput run_mice(const Dataset& ds, const MiceStrategy& params) {
  if (params.max_iter < 1) throw StrategyError("mice: max_iter must be >= 1");
  if (!(params.tol > 0)) throw StrategyError("mice: tol must be > 0");

  const auto feats = ds.feature_indices();
  const std::size_t m = feats.size();
  if (m < 2) throw StrategyError("mice: need at least 2 feature columns");

  MiceFitOutput out;
  out.state.max_iter = params.max_iter;
  out.state.tol = params.tol;
  out.state.models.resize(m);

  std::vector<std::vector<std::size_t>> missing_rows(m), observed_rows(m);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      (ds.is_missing(i, feats[k]) ? missing_rows[k] : observed_rows[k]).push_back(i);
    }
    if (observed_rows[k].empty()) {
      throw StrategyError("mice: column '" + ds.column(feats[k]).name +
                          "' has no observed cells");
    }
    auto stats = column_stats(ds, feats[k], 0.0);
    out.state.train_means.push_back(stats.mean);
    out.state.train_stds.push_back(stats.stddev > 0 ? stats.stddev : 1.0);
  }

  // mean-initialized working matrix
  out.work.assign(ds.n_rows(), std::vector<double>(m));
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      out.work[i][k] =
          ds.is_missing(i, feats[k]) ? out.state.train_means[k] : ds.value(i, feats[k]);
    }
  }

  const bool anything_missing =
      std::any_of(missing_rows.begin(), missing_rows.end(),
                  [](const auto& v) { return !v.empty(); });
  if (!anything_missing) {
    out.trace.converged = true;
    return out;
  }

  std::vector<std::size_t> all(m);
  for (std::size_t k = 0; k < m; ++k) all[k] = k;

  for (std::size_t sweep = 0; sweep < params.max_iter; ++sweep) {
    MiceSweep record;
    // snapshot of the imputed cells for the between-sweep delta
    std::vector<std::vector<double>> before = out.work;

    for (std::size_t k = 0; k < m; ++k) {
      if (missing_rows[k].empty()) continue;
      std::vector<std::size_t> predictors;
      for (std::size_t c : all) {
        if (c != k) predictors.push_back(c);
      }
      std::vector<double> y;
      y.reserve(observed_rows[k].size());
      for (std::size_t r : observed_rows[k]) y.push_back(ds.value(r, feats[k]));

      LsqFit fit = solve_least_squares(out.work, observed_rows[k], predictors, y);
      if (!fit.ok) {
        record.fallback_columns.push_back(feats[k]);
        out.state.models[k] = FittedImputer::MiceColumnModel{
            out.state.train_means[k], std::vector<double>(predictors.size(), 0.0), true};
        for (std::size_t r : missing_rows[k]) out.work[r][k] = out.state.train_means[k];
        continue;
      }
      out.state.models[k] =
          FittedImputer::MiceColumnModel{fit.intercept, fit.coefficients, false};
      for (std::size_t r : missing_rows[k]) {
        std::vector<double> others;
        others.reserve(predictors.size());
        for (std::size_t c : predictors) others.push_back(out.work[r][c]);
        out.work[r][k] = predict_lsq(*out.state.models[k], others);
      }
    }

    double delta = 0;
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t r : missing_rows[k]) {
        delta = std::max(delta, std::abs(out.work[r][k] - before[r][k]) /
                                    out.state.train_stds[k]);
      }
    }
    record.max_change = delta;
    out.trace.sweeps.push_back(std::move(record));
    out.trace.final_delta = delta;
    if (delta <= params.tol) {
      out.trace.converged = true;
      break;
    }
  }
  return out;
}

ImputedDataset complete_from_work(const Dataset& ds,
                                  const std::vector<std::vector<double>>& work,
                                  const ImputationStrategy& strategy,
                                  std::optional<MiceTrace> trace) {
  const auto feats = ds.feature_indices();
  ImputedDataset out;
  out.data = ds;
  out.provenance = ProvenanceMask(ds.n_rows(), ds.n_cols());
  out.provenance.set_strategy(strategy_name(strategy));
  out.strategy = strategy;
  out.trace = std::move(trace);
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    for (std::size_t k = 0; k < feats.size(); ++k) {
      if (ds.is_missing(i, feats[k])) {
        out.data.set_value(i, feats[k], work[i][k]);
        out.provenance.set_origin(i, feats[k], CellOrigin::Imputed);
      }
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// fitted imputer application

ImputedDataset FittedImputer::apply(const Dataset& ds) const {
  if (std::holds_alternative<CompleteCaseStrategy>(strategy_)) {
    check_feature_schema(feature_names_, ds);
    return apply_complete_case(ds);
  }
  if (std::holds_alternative<IndicatorStrategy>(strategy_)) {
    check_feature_schema(feature_names_, ds);
    return apply_indicator(ds, indicator_columns_);
  }
  if (central_) {
    check_feature_schema(feature_names_, ds);
    return apply_central_state(*central_, strategy_, ds);
  }

  // MICE: mean-initialize from the training means, then iterate the stored
  // per-column regressions until the updates settle
  check_feature_schema(feature_names_, ds);
  const auto& state = *mice_;
  const auto feats = ds.feature_indices();
  const std::size_t m = feats.size();

  std::vector<std::vector<std::size_t>> missing_rows(m);
  std::vector<std::vector<double>> work(ds.n_rows(), std::vector<double>(m));
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      if (ds.is_missing(i, feats[k])) {
        missing_rows[k].push_back(i);
        work[i][k] = state.train_means[k];
      } else {
        work[i][k] = ds.value(i, feats[k]);
      }
    }
  }

  MiceTrace trace;
  bool anything_missing = std::any_of(missing_rows.begin(), missing_rows.end(),
                                      [](const auto& v) { return !v.empty(); });
  if (anything_missing) {
    for (std::size_t sweep = 0; sweep < state.max_iter; ++sweep) {
      double delta = 0;
      MiceSweep record;
      for (std::size_t k = 0; k < m; ++k) {
        if (missing_rows[k].empty()) continue;
        if (!state.models[k]) {
          // column was complete at fit time; keep the train-mean fill
          continue;
        }
        for (std::size_t r : missing_rows[k]) {
          std::vector<double> others;
          others.reserve(m - 1);
          for (std::size_t c = 0; c < m; ++c) {
            if (c != k) others.push_back(work[r][c]);
          }
          const double next = predict_lsq(*state.models[k], others);
          delta = std::max(delta, std::abs(next - work[r][k]) / state.train_stds[k]);
          work[r][k] = next;
        }
      }
      record.max_change = delta;
      trace.sweeps.push_back(record);
      trace.final_delta = delta;
      if (delta <= state.tol) {
        trace.converged = true;
        break;
      }
    }
  } else {
    trace.converged = true;
  }
  return complete_from_work(ds, work, strategy_, std::move(trace));
}

// ---------------------------------------------------------------------------
// fitting

ImputerFit fit_imputer(const Dataset& train, const ImputationStrategy& strategy) {
  ImputerFit out;
  out.imputer.strategy_ = strategy;
  out.imputer.feature_names_ = train.feature_names();

  if (std::holds_alternative<CompleteCaseStrategy>(strategy)) {
    out.train = apply_complete_case(train);
    return out;
  }
  if (const auto* ind = std::get_if<IndicatorStrategy>(&strategy)) {
    std::vector<std::string> columns = ind->columns;
    if (columns.empty()) {
      for (std::size_t j : train.feature_indices()) {
        if (!train.fully_observed(j)) columns.push_back(train.column(j).name);
      }
    }
    out.imputer.indicator_columns_ = columns;
    out.train = apply_indicator(train, columns);
    out.train.strategy = strategy;
    return out;
  }
  if (const auto* central = std::get_if<CentralStrategy>(&strategy)) {
    out.imputer.central_ = fit_central_state(train, *central);
    out.train = apply_central_state(*out.imputer.central_, strategy, train);
    return out;
  }

  const auto& mice = std::get<MiceStrategy>(strategy);
  MiceFitOutput fit = run_mice(train, mice);
  out.imputer.mice_ = std::move(fit.state);
  out.train = complete_from_work(train, fit.work, strategy, std::move(fit.trace));
  return out;
}

ImputedDataset complete_case(const Dataset& ds) {
  return fit_imputer(ds, CompleteCaseStrategy{}).train;
}

ImputedDataset indicator_encode(const Dataset& ds,
                                const std::vector<std::string>& columns) {
  return fit_imputer(ds, IndicatorStrategy{columns}).train;
}

ImputedDataset central_impute(const Dataset& ds, CentralMeasure measure,
                              const std::optional<std::string>& cohort_key,
                              double trim) {
  return fit_imputer(ds, CentralStrategy{measure, cohort_key, trim}).train;
}

ImputedDataset mice_impute(const Dataset& ds, const MiceStrategy& params) {
  return fit_imputer(ds, params).train;
}

}  // namespace imprint
