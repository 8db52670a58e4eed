#include "imprint/evaluate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "imprint/csv.hpp"
#include "imprint/errors.hpp"
#include "imprint/text.hpp"

namespace imprint {

namespace {

void check_metric_inputs(std::span<const double> predictions,
                         std::span<const double> actuals) {
  if (predictions.size() != actuals.size()) {
    throw DataError("metric inputs differ in length (" +
                    std::to_string(predictions.size()) + " vs " +
                    std::to_string(actuals.size()) + ")");
  }
  if (predictions.empty()) throw DataError("metric inputs are empty");
}

}  // namespace

double mae(std::span<const double> predictions, std::span<const double> actuals) {
  check_metric_inputs(predictions, actuals);
  std::vector<double> abs_err(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    abs_err[i] = std::fabs(predictions[i] - actuals[i]);
  }
  return stable_mean(std::move(abs_err));
}

double mse(std::span<const double> predictions, std::span<const double> actuals) {
  check_metric_inputs(predictions, actuals);
  std::vector<double> sq_err(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - actuals[i];
    sq_err[i] = e * e;
  }
  return stable_mean(std::move(sq_err));
}

namespace {

Dataset load_raw(const ExperimentConfig& config) {
  if (config.synth) {
    SynthSpec spec = *config.synth;
    spec.seed = derive_seed(config.seed ^ spec.seed, "synth");
    return synth_generate(spec);
  }
  CsvOptions options;
  options.missing_token = config.csv->missing_token;
  Dataset ds = load_csv(config.csv->path, config.csv->target, options);
  if (config.csv->group) assign_role(ds, *config.csv->group, ColumnRole::GroupLabel);
  if (config.csv->cohort) assign_role(ds, *config.csv->cohort, ColumnRole::CohortKey);
  return ds;
}

/// Completes a train/test pair under one strategy without test-set leakage.
/// The complete-case strategy maps to the no-missing-variables baseline:
/// both sides keep only feature columns that are fully observed in training.
std::pair<ImputedDataset, ImputedDataset> complete_pair(const Dataset& train,
                                                        const Dataset& test,
                                                        const ImputationStrategy& strategy) {
  if (std::holds_alternative<CompleteCaseStrategy>(strategy)) {
    std::vector<std::size_t> keep;
    std::size_t kept_features = 0;
    for (std::size_t j = 0; j < train.n_cols(); ++j) {
      if (train.column(j).role != ColumnRole::Feature) {
        keep.push_back(j);
      } else if (train.fully_observed(j)) {
        keep.push_back(j);
        ++kept_features;
      }
    }
    if (kept_features == 0) {
      throw StrategyError(
          "complete-case baseline: every feature column has missing training cells");
    }
    Dataset train_sel = train.select_columns(keep);
    std::vector<std::size_t> test_cols;
    test_cols.reserve(keep.size());
    for (const auto& meta : train_sel.columns()) {
      test_cols.push_back(test.require_column(meta.name));
    }
    Dataset test_sel = test.select_columns(test_cols);

    ImputedDataset a;
    a.provenance = ProvenanceMask(train_sel.n_rows(), train_sel.n_cols());
    a.provenance.set_strategy(strategy_name(strategy));
    a.data = std::move(train_sel);
    a.strategy = strategy;
    ImputedDataset b;
    b.provenance = ProvenanceMask(test_sel.n_rows(), test_sel.n_cols());
    b.provenance.set_strategy(strategy_name(strategy));
    b.data = std::move(test_sel);
    b.strategy = strategy;
    return {std::move(a), std::move(b)};
  }

  ImputerFit fit = fit_imputer(train, strategy);
  ImputedDataset test_completed = fit.imputer.apply(test);
  return {std::move(fit.train), std::move(test_completed)};
}

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double ma = stable_mean(ra);
  const double mb = stable_mean(rb);
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0 || vb == 0) return va == vb ? 1.0 : 0.0;  // all-tied rankings
  return cov / std::sqrt(va * vb);
}

std::vector<double> importance_by_index(const Explanation& expl) {
  std::vector<double> out(expl.attributions.size(), 0.0);
  for (const auto& attr : expl.attributions) {
    if (attr.feature_index >= out.size()) {
      throw MismatchError("attribution index out of range");
    }
    out[attr.feature_index] = attr.importance;
  }
  return out;
}

std::set<std::string> top_k_set(const Explanation& expl, std::size_t k) {
  std::set<std::string> names;
  const std::size_t lim = std::min(k, expl.attributions.size());
  for (std::size_t i = 0; i < lim; ++i) names.insert(expl.attributions[i].feature);
  return names;
}

std::string sanitize_field(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

ExperimentData load_experiment_data(const ExperimentConfig& config) {
  Dataset base = load_raw(config);
  ExperimentData out;
  if (config.missingness) {
    MaskedData masked =
        apply_missingness(base, *config.missingness, derive_seed(config.seed, "mask"));
    out.data = std::move(masked.masked);
    out.ground_truth = std::move(masked.ground_truth);
    out.masked = true;
  } else {
    out.data = base;
    out.ground_truth = std::move(base);
  }
  return out;
}

std::vector<double> observed_feature_means(const Dataset& ds, const ProvenanceMask& mask) {
  if (mask.n_rows() != ds.n_rows() || mask.n_cols() != ds.n_cols()) {
    throw MismatchError("provenance shape does not match the dataset");
  }
  std::vector<double> means;
  for (std::size_t j : ds.feature_indices()) {
    std::vector<double> observed;
    std::vector<double> all;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      const double v = ds.value(i, j);
      all.push_back(v);
      if (mask.origin(i, j) == CellOrigin::Observed) observed.push_back(v);
    }
    means.push_back(stable_mean(observed.empty() ? std::move(all) : std::move(observed)));
  }
  return means;
}

std::vector<ColumnStats> feature_stats(const Dataset& ds) {
  std::vector<ColumnStats> stats;
  for (std::size_t j : ds.feature_indices()) stats.push_back(column_stats(ds, j));
  return stats;
}

ExplainContext make_explain_context(const Model& model, const Dataset& train,
                                    const ProvenanceMask& train_mask) {
  const auto mapping = model.feature_mapping(train);
  const auto train_features = train.feature_indices();
  if (mapping != train_features) {
    throw MismatchError("explain context: training data feature order differs from the model");
  }
  ExplainContext context;
  context.baseline = observed_feature_means(train, train_mask);
  context.stats = feature_stats(train);
  return context;
}

Explanation explain_row(const Model& model, const ExplainContext& context,
                        const Dataset& ds, const ProvenanceMask& mask, std::size_t row,
                        const ExperimentConfig& config) {
  if (row >= ds.n_rows()) {
    throw DataError("explain: row index " + std::to_string(row) + " out of range (" +
                    std::to_string(ds.n_rows()) + " rows)");
  }
  const auto mapping = model.feature_mapping(ds);
  const std::vector<double> x = ds.row(row, mapping);
  const OriginRow origins = mask.row(row, mapping);

  if (config.explainer == ExplainerKind::Shapley) {
    return shapley_exact(model, x, context.baseline, origins, config.top_k);
  }
  LimeParams params = config.lime;
  params.seed = derive_seed(derive_seed(config.seed, "lime") ^ config.lime.seed,
                            "row-" + std::to_string(row));
  return lime_local(model, x, context.stats, params, origins, config.top_k);
}

std::vector<MetricsRow> run_strategy_comparison(const ExperimentConfig& config) {
  if (config.strategies.empty()) {
    throw ConfigError("config: strategies must not be empty for evaluation");
  }
  if (config.models.empty()) {
    throw ConfigError("config: models must not be empty for evaluation");
  }
  ExperimentData data = load_experiment_data(config);
  TrainTestSplit split =
      split_train_test(data.data, config.test_fraction, derive_seed(config.seed, "split"));

  Dataset train = std::move(split.train);
  Dataset test = std::move(split.test);
  if (config.drop_missing_above) {
    Dataset kept = drop_high_missing(train, *config.drop_missing_above);
    if (kept.n_cols() != train.n_cols()) {
      std::vector<std::size_t> cols;
      cols.reserve(kept.n_cols());
      for (const auto& meta : kept.columns()) cols.push_back(test.require_column(meta.name));
      test = test.select_columns(cols);
      train = std::move(kept);
    }
  }
  const std::vector<double> actual = test.target_values();

  std::vector<MetricsRow> rows;
  rows.reserve(config.strategies.size() * config.models.size());
  for (const auto& strategy : config.strategies) {
    for (ModelFamily family : config.models) {
      MetricsRow row;
      row.strategy = strategy_name(strategy);
      row.model_family = family_name(family);
      row.n_test = test.n_rows();
      try {
        auto [train_completed, test_completed] = complete_pair(train, test, strategy);
        Model model = fit_model(train_completed.data, family, config.train);
        const std::vector<double> predictions = model.predict(test_completed.data);
        row.mae = mae(predictions, actual);
        row.mse = mse(predictions, actual);
      } catch (const Error& e) {
        // isolate the failing cell; siblings still run
        row.ok = false;
        row.error = e.what();
        row.mae = 0;
        row.mse = 0;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

DriftReport explanation_drift(const ExperimentConfig& config,
                              const ImputationStrategy& strategy) {
  if (std::holds_alternative<CompleteCaseStrategy>(strategy)) {
    throw StrategyError("explanation drift needs a strategy that fills cells in");
  }
  const DriftSection section = config.drift.value_or(DriftSection{});

  ExperimentData data = load_experiment_data(config);
  TrainTestSplit split =
      split_train_test(data.data, config.test_fraction, derive_seed(config.seed, "split"));
  Dataset truth_train = data.ground_truth.select_rows(split.train_rows);
  Dataset truth_test = data.ground_truth.select_rows(split.test_rows);

  ImputerFit fit = fit_imputer(split.train, strategy);
  ImputedDataset test_completed = fit.imputer.apply(split.test);

  Model model_imputed = fit_model(fit.train.data, section.model, config.train);
  Model model_truth = fit_model(truth_train, section.model, config.train);

  const ExplainContext ctx_imputed =
      make_explain_context(model_imputed, fit.train.data, fit.train.provenance);
  const ProvenanceMask truth_train_mask(truth_train.n_rows(), truth_train.n_cols());
  const ExplainContext ctx_truth =
      make_explain_context(model_truth, truth_train, truth_train_mask);
  const ProvenanceMask truth_test_mask(truth_test.n_rows(), truth_test.n_cols());

  DriftReport report;
  report.n_rows_explained = std::min(section.n_explain_rows, test_completed.data.n_rows());
  if (report.n_rows_explained == 0) throw DataError("explanation drift: no test rows");

  double diff_sum = 0, rho_sum = 0, preserved = 0;
  for (std::size_t i = 0; i < report.n_rows_explained; ++i) {
    const Explanation imputed = explain_row(model_imputed, ctx_imputed, test_completed.data,
                                            test_completed.provenance, i, config);
    const Explanation truth =
        explain_row(model_truth, ctx_truth, truth_test, truth_test_mask, i, config);

    const auto phi_imputed = importance_by_index(imputed);
    const auto phi_truth = importance_by_index(truth);
    if (phi_imputed.size() != phi_truth.size()) {
      throw MismatchError("explanation drift: feature sets differ between sides");
    }
    std::vector<double> abs_diff(phi_imputed.size());
    std::vector<double> mag_imputed(phi_imputed.size());
    std::vector<double> mag_truth(phi_imputed.size());
    for (std::size_t j = 0; j < phi_imputed.size(); ++j) {
      abs_diff[j] = std::fabs(phi_imputed[j] - phi_truth[j]);
      mag_imputed[j] = std::fabs(phi_imputed[j]);
      mag_truth[j] = std::fabs(phi_truth[j]);
    }
    diff_sum += stable_mean(std::move(abs_diff));
    rho_sum += spearman(mag_imputed, mag_truth);
    if (top_k_set(imputed, config.top_k) == top_k_set(truth, config.top_k)) preserved += 1;
    if (imputed.warning) ++report.warning_count;
  }
  const auto n = static_cast<double>(report.n_rows_explained);
  report.mean_attribution_diff = diff_sum / n;
  report.rank_correlation = rho_sum / n;
  report.top_k_preserved = preserved / n;
  return report;
}

GroupFairnessReport group_disparity(std::span<const double> predictions,
                                    std::span<const double> actuals,
                                    std::span<const double> group_labels) {
  check_metric_inputs(predictions, actuals);
  if (group_labels.size() != predictions.size()) {
    throw DataError("group labels differ in length from predictions");
  }
  std::map<double, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < group_labels.size(); ++i) {
    members[group_labels[i]].push_back(i);
  }
  if (members.size() < 2) {
    throw DataError("group disparity needs at least two groups, got " +
                    std::to_string(members.size()));
  }
  GroupFairnessReport report;
  for (const auto& [label, rows] : members) {
    GroupStats stats;
    stats.group = label;
    stats.n = rows.size();
    std::vector<double> abs_err, signed_err;
    abs_err.reserve(rows.size());
    signed_err.reserve(rows.size());
    for (std::size_t i : rows) {
      abs_err.push_back(std::fabs(predictions[i] - actuals[i]));
      signed_err.push_back(predictions[i] - actuals[i]);
    }
    stats.mae = stable_mean(std::move(abs_err));
    stats.mean_signed_error = stable_mean(std::move(signed_err));
    report.groups.push_back(stats);
  }
  double lo = report.groups.front().mean_signed_error;
  double hi = lo;
  for (const auto& g : report.groups) {
    lo = std::min(lo, g.mean_signed_error);
    hi = std::max(hi, g.mean_signed_error);
  }
  report.disparity = hi - lo;
  return report;
}

namespace {

GroupFairnessReport fairness_side(const ExperimentConfig& config,
                                  const FairnessSection& section, const Dataset& masked) {
  TrainTestSplit split =
      split_train_test(masked, config.test_fraction, derive_seed(config.seed, "split"));
  auto [train_completed, test_completed] =
      complete_pair(split.train, split.test, section.strategy);
  Model model = fit_model(train_completed.data, section.model, config.train);
  const std::vector<double> predictions = model.predict(test_completed.data);
  const std::vector<double> actual = test_completed.data.target_values();

  std::size_t group_col = test_completed.data.n_cols();
  for (std::size_t j = 0; j < test_completed.data.n_cols(); ++j) {
    if (test_completed.data.column(j).role == ColumnRole::GroupLabel) {
      group_col = j;
      break;
    }
  }
  if (group_col == test_completed.data.n_cols()) {
    throw DataError("fairness comparison needs a group label column");
  }
  std::vector<double> labels(test_completed.data.n_rows());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (test_completed.data.is_missing(i, group_col)) {
      throw DataError("fairness comparison: missing group label in test row " +
                      std::to_string(i));
    }
    labels[i] = test_completed.data.value(i, group_col);
  }
  return group_disparity(predictions, actual, labels);
}

MissingnessSpec scale_rates(const MissingnessSpec& spec, double factor) {
  auto scaled = [factor](double r) { return std::min(1.0, r * factor); };
  MissingnessSpec out = spec;
  if (auto* m = std::get_if<McarSpec>(&out.mechanism)) {
    m->rate = scaled(m->rate);
  } else if (auto* m = std::get_if<MarSpec>(&out.mechanism)) {
    m->rate_below = scaled(m->rate_below);
    m->rate_above = scaled(m->rate_above);
  } else {
    auto& n = std::get<NmarSpec>(out.mechanism);
    n.rate_low = scaled(n.rate_low);
    n.rate_high = scaled(n.rate_high);
  }
  return out;
}

}  // namespace

FairnessComparison fairness_comparison(const ExperimentConfig& config) {
  if (!config.missingness) {
    throw ConfigError("config: fairness comparison needs a missingness section");
  }
  const FairnessSection section = config.fairness.value_or(FairnessSection{});

  Dataset base = load_raw(config);
  MaskedData mar =
      apply_missingness(base, *config.missingness, derive_seed(config.seed, "mask"));

  FairnessComparison out;
  out.matched_rate = expected_missing_rate(base, *config.missingness);
  MissingnessSpec mcar_spec;
  mcar_spec.columns = config.missingness->columns;
  mcar_spec.mechanism = McarSpec{out.matched_rate};
  MaskedData mcar = apply_missingness(base, mcar_spec, derive_seed(config.seed, "mask-mcar"));

  out.mar = fairness_side(config, section, mar.masked);
  out.mcar = fairness_side(config, section, mcar.masked);
  return out;
}

ShiftReport missingness_shift(const ExperimentConfig& config) {
  if (!config.missingness) {
    throw ConfigError("config: missingness shift needs a missingness section");
  }
  const ShiftSection section = config.shift.value_or(ShiftSection{});

  Dataset base = load_raw(config);
  MaskedData masked =
      apply_missingness(base, *config.missingness, derive_seed(config.seed, "mask"));
  TrainTestSplit split = split_train_test(masked.masked, config.test_fraction,
                                          derive_seed(config.seed, "split"));
  Dataset truth_test = masked.ground_truth.select_rows(split.test_rows);

  // trained on data masked at the base rate; trees route missing cells
  Model model = fit_model(split.train, section.model, config.train);
  const std::vector<double> actual = truth_test.target_values();

  ShiftReport report;
  report.train_rate = expected_missing_rate(base, *config.missingness);
  report.mae_matched = mae(model.predict(split.test), actual);

  const MissingnessSpec scaled = scale_rates(*config.missingness, section.factor);
  report.shifted_rate = expected_missing_rate(truth_test, scaled);
  MaskedData shifted =
      apply_missingness(truth_test, scaled, derive_seed(config.seed, "mask-shift"));
  report.mae_shifted = mae(model.predict(shifted.masked), actual);
  return report;
}

void write_metrics_csv(std::span<const MetricsRow> rows, std::ostream& out) {
  out << "strategy,model,mae,mse,n_test,ok,error\n";
  for (const auto& row : rows) {
    out << row.strategy << ',' << row.model_family << ',';
    if (row.ok) {
      out << format_double(row.mae) << ',' << format_double(row.mse);
    } else {
      out << ',';
    }
    out << ',' << row.n_test << ',' << (row.ok ? '1' : '0') << ','
        << sanitize_field(row.error) << '\n';
  }
}

std::string format_metrics_table(std::span<const MetricsRow> rows) {
  const std::vector<std::string> header = {"Strategy", "Model", "MAE", "MSE", "Note"};
  std::vector<std::array<std::string, 5>> cells;
  cells.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.ok) {
      cells.push_back({row.strategy, row.model_family, format_fixed(row.mae, 4),
                       format_fixed(row.mse, 4), ""});
    } else {
      cells.push_back({row.strategy, row.model_family, "-", "-", "failed: " + row.error});
    }
  }
  std::array<std::size_t, 5> width{};
  for (std::size_t c = 0; c < 5; ++c) width[c] = header[c].size();
  for (const auto& r : cells) {
    for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  auto emit_row = [&](const auto& r) {
    for (std::size_t c = 0; c < 5; ++c) {
      if (c) out << "  ";
      out << r[c] << std::string(width[c] - r[c].size(), ' ');
    }
    out << '\n';
  };
  emit_row(header);
  std::array<std::string, 5> rule;
  for (std::size_t c = 0; c < 5; ++c) rule[c] = std::string(width[c], '-');
  emit_row(rule);
  for (const auto& r : cells) emit_row(r);
  return out.str();
}

void write_drift_csv(const DriftReport& report, std::ostream& out) {
  out << "mean_attribution_diff,rank_correlation,top_k_preserved,n_rows_explained,"
         "warning_count\n";
  out << format_double(report.mean_attribution_diff) << ','
      << format_double(report.rank_correlation) << ','
      << format_double(report.top_k_preserved) << ',' << report.n_rows_explained << ','
      << report.warning_count << '\n';
}

void write_fairness_csv(const FairnessComparison& report, std::ostream& out) {
  out << "masking,group,n,mae,mean_signed_error,disparity\n";
  auto emit = [&](const char* label, const GroupFairnessReport& side) {
    for (const auto& g : side.groups) {
      out << label << ',' << format_double(g.group) << ',' << g.n << ','
          << format_double(g.mae) << ',' << format_double(g.mean_signed_error) << ','
          << format_double(side.disparity) << '\n';
    }
  };
  emit("mar", report.mar);
  emit("mcar", report.mcar);
  out << "# matched_mcar_rate " << format_double(report.matched_rate) << '\n';
}

void write_shift_csv(const ShiftReport& report, std::ostream& out) {
  out << "mae_matched,mae_shifted,train_rate,shifted_rate\n";
  out << format_double(report.mae_matched) << ',' << format_double(report.mae_shifted)
      << ',' << format_double(report.train_rate) << ','
      << format_double(report.shifted_rate) << '\n';
}

}  // namespace imprint
