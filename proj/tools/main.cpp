// imprint: simulate missingness, impute, train, explain and evaluate tabular
// regression experiments from a single JSON config.
//
// Exit codes: 0 success, 2 config or data errors, 3 strategy failures,
// 4 model/data shape mismatches.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imprint/csv.hpp"
#include "imprint/errors.hpp"
#include "imprint/evaluate.hpp"
#include "imprint/text.hpp"

namespace fs = std::filesystem;
using namespace imprint;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides out_dir)");
  cmd->add_option("--seed", args.seed, "master seed (overrides the config)")
      ->each([&args](const std::string&) { args.seed_set = true; });
}

ExperimentConfig load(const CommonArgs& args) {
  ExperimentConfig config = load_config(args.config_path);
  if (args.seed_set) config.seed = args.seed;
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  return config;
}

fs::path prepare_out_dir(const ExperimentConfig& config) {
  if (config.out_dir.empty()) {
    throw ConfigError("an output directory is required (--out or config out_dir)");
  }
  fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

/// Removes every registered artifact unless disarmed, so a failed run leaves
/// no partial files behind.
struct ArtifactGuard {
  std::vector<fs::path> paths;
  bool armed = true;

  fs::path track(fs::path p) {
    paths.push_back(p);
    return p;
  }
  ~ArtifactGuard() {
    if (!armed) return;
    for (const auto& p : paths) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
};

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

template <typename Fn>
void write_stream_file(const fs::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  fn(out);
  out.flush();
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void note_written(const fs::path& path) { std::cout << "wrote " << path.string() << '\n'; }

/// Reinterprets --in as the data source: the file replaces the configured
/// source and no further masking is applied (the file already carries its
/// holes, if any).
ExperimentConfig with_input_file(ExperimentConfig config, const std::string& in_path) {
  CsvSource src;
  src.path = in_path;
  if (config.csv) {
    src.target = config.csv->target;
    src.missing_token = config.csv->missing_token;
    src.group = config.csv->group;
    src.cohort = config.csv->cohort;
  } else {
    src.target = config.synth->target_name;
    if (config.synth->group) src.group = config.synth->group_name;
  }
  config.csv = src;
  config.synth.reset();
  config.missingness.reset();
  return config;
}

ImputedDataset as_observed(Dataset ds) {
  ImputedDataset out;
  out.provenance = ProvenanceMask(ds.n_rows(), ds.n_cols());
  out.provenance.set_strategy("none");
  out.data = std::move(ds);
  out.strategy = CompleteCaseStrategy{};
  return out;
}

std::string describe_imputation(const ImputedDataset& result, std::size_t input_rows) {
  std::string text;
  text += "strategy " + strategy_name(result.strategy) + "\n";
  text += "rows " + std::to_string(result.data.n_rows()) + " of " +
          std::to_string(input_rows) + "\n";
  std::size_t filled = 0, indicator = 0;
  for (std::size_t i = 0; i < result.provenance.n_rows(); ++i) {
    for (std::size_t j = 0; j < result.provenance.n_cols(); ++j) {
      const CellOrigin origin = result.provenance.origin(i, j);
      if (origin == CellOrigin::Imputed) ++filled;
      if (origin == CellOrigin::Indicator) ++indicator;
    }
  }
  text += "imputed_cells " + std::to_string(filled) + "\n";
  text += "indicator_cells " + std::to_string(indicator) + "\n";
  if (result.trace) {
    text += "sweeps " + std::to_string(result.trace->sweeps.size()) + "\n";
    for (std::size_t s = 0; s < result.trace->sweeps.size(); ++s) {
      const auto& sweep = result.trace->sweeps[s];
      text += "sweep " + std::to_string(s + 1) + " max_change " +
              format_double(sweep.max_change);
      if (!sweep.fallback_columns.empty()) {
        text += " fallback_columns";
        for (std::size_t c : sweep.fallback_columns) text += " " + std::to_string(c);
      }
      text += "\n";
    }
    text += std::string("converged ") + (result.trace->converged ? "yes" : "no") + "\n";
    text += "final_delta " + format_double(result.trace->final_delta) + "\n";
  }
  return text;
}

int run_simulate(const CommonArgs& args) {
  const ExperimentConfig config = load(args);
  const fs::path dir = prepare_out_dir(config);
  const ExperimentData data = load_experiment_data(config);

  ArtifactGuard guard;
  save_csv(data.ground_truth, guard.track(dir / "complete.csv").string());
  save_csv(data.data, guard.track(dir / "masked.csv").string());
  save_mask_csv(data.data, guard.track(dir / "mask.csv").string());
  guard.armed = false;
  for (const auto& p : guard.paths) note_written(p);
  return 0;
}

int run_impute(const CommonArgs& args, const std::string& in_path) {
  ExperimentConfig config = load(args);
  if (!in_path.empty()) config = with_input_file(std::move(config), in_path);
  if (!config.strategy) {
    throw ConfigError("config: 'strategy' is required for the impute subcommand");
  }
  const fs::path dir = prepare_out_dir(config);
  const ExperimentData data = load_experiment_data(config);
  const ImputedDataset result = fit_imputer(data.data, *config.strategy).train;

  ArtifactGuard guard;
  save_csv(result.data, guard.track(dir / "imputed.csv").string());
  save_provenance_csv(result.provenance, result.data.columns(),
                      guard.track(dir / "provenance.csv").string());
  write_text_file(guard.track(dir / "trace.txt"),
                  describe_imputation(result, data.data.n_rows()));
  guard.armed = false;
  for (const auto& p : guard.paths) note_written(p);
  return 0;
}

int run_train(const CommonArgs& args, const std::string& in_path) {
  ExperimentConfig config = load(args);
  if (!in_path.empty()) config = with_input_file(std::move(config), in_path);
  if (!config.model) {
    throw ConfigError("config: 'model' is required for the train subcommand");
  }
  const fs::path dir = prepare_out_dir(config);
  const ExperimentData data = load_experiment_data(config);
  Dataset train_data = config.strategy
                           ? fit_imputer(data.data, *config.strategy).train.data
                           : data.data;
  const Model model = fit_model(train_data, *config.model, config.train);

  ArtifactGuard guard;
  model.save_file(guard.track(dir / "model.txt").string());
  guard.armed = false;
  for (const auto& p : guard.paths) note_written(p);
  return 0;
}

int run_explain(const CommonArgs& args, const std::string& in_path,
                const std::string& provenance_path, const std::string& model_path,
                std::optional<std::size_t> row_flag) {
  ExperimentConfig config = load(args);
  const fs::path dir = prepare_out_dir(config);

  ImputedDataset completed;
  if (!in_path.empty()) {
    if (provenance_path.empty()) {
      throw ConfigError("--in needs --provenance so imputed cells can be flagged");
    }
    config = with_input_file(std::move(config), in_path);
    completed = as_observed(load_experiment_data(config).data);
    ProvenanceMask mask = load_provenance_csv(provenance_path);
    if (mask.n_rows() != completed.data.n_rows() ||
        mask.n_cols() != completed.data.n_cols()) {
      throw MismatchError("provenance shape does not match the input data");
    }
    completed.provenance = std::move(mask);
  } else {
    const ExperimentData data = load_experiment_data(config);
    if (config.strategy) {
      completed = fit_imputer(data.data, *config.strategy).train;
    } else {
      completed = as_observed(data.data);
    }
  }

  Model model;
  if (!model_path.empty()) {
    model = Model::load_file(model_path);
  } else {
    if (!config.model) {
      throw ConfigError("config: 'model' is required when --model is not given");
    }
    model = fit_model(completed.data, *config.model, config.train);
  }

  const std::size_t row = row_flag ? *row_flag : config.row_index.value_or(0);
  const ExplainContext context =
      make_explain_context(model, completed.data, completed.provenance);
  const Explanation explanation =
      explain_row(model, context, completed.data, completed.provenance, row, config);

  ArtifactGuard guard;
  write_stream_file(guard.track(dir / "explanation.csv"),
                    [&](std::ostream& out) { write_explanation_csv(explanation, out); });
  guard.armed = false;
  std::cout << format_explanation_table(explanation);
  for (const auto& p : guard.paths) note_written(p);
  return 0;
}

int run_evaluate(const CommonArgs& args) {
  const ExperimentConfig config = load(args);
  const fs::path dir = prepare_out_dir(config);

  const std::vector<MetricsRow> rows = run_strategy_comparison(config);

  ArtifactGuard guard;
  write_stream_file(guard.track(dir / "comparison.csv"),
                    [&](std::ostream& out) { write_metrics_csv(rows, out); });
  const std::string table = format_metrics_table(rows);
  write_text_file(guard.track(dir / "comparison.txt"), table);

  if (config.drift) {
    const DriftReport report = explanation_drift(config, config.drift->strategy);
    write_stream_file(guard.track(dir / "drift.csv"),
                      [&](std::ostream& out) { write_drift_csv(report, out); });
  }
  if (config.fairness) {
    const FairnessComparison report = fairness_comparison(config);
    write_stream_file(guard.track(dir / "fairness.csv"),
                      [&](std::ostream& out) { write_fairness_csv(report, out); });
  }
  if (config.shift) {
    const ShiftReport report = missingness_shift(config);
    write_stream_file(guard.track(dir / "shift.csv"),
                      [&](std::ostream& out) { write_shift_csv(report, out); });
  }
  guard.armed = false;
  std::cout << table;
  for (const auto& p : guard.paths) note_written(p);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"imputation-aware tabular regression experiments"};
  app.require_subcommand(1);

  CommonArgs sim_args, imp_args, train_args, explain_args, eval_args;
  std::string imp_in, train_in, explain_in, explain_prov, explain_model;
  std::optional<std::size_t> explain_row_flag;

  CLI::App* sim = app.add_subcommand("simulate", "generate data and mask cells");
  add_common(sim, sim_args);

  CLI::App* imp = app.add_subcommand("impute", "fill missing cells per the strategy");
  add_common(imp, imp_args);
  imp->add_option("--in", imp_in, "input CSV (overrides the config data source)");

  CLI::App* train = app.add_subcommand("train", "fit the configured model");
  add_common(train, train_args);
  train->add_option("--in", train_in, "input CSV (overrides the config data source)");

  CLI::App* explain = app.add_subcommand("explain", "explain one prediction");
  add_common(explain, explain_args);
  explain->add_option("--in", explain_in, "completed CSV to explain");
  explain->add_option("--provenance", explain_prov, "provenance sidecar for --in");
  explain->add_option("--model", explain_model, "saved model file to reuse");
  explain->add_option("--row", explain_row_flag, "row index to explain");

  CLI::App* eval = app.add_subcommand("evaluate", "run the strategy comparison");
  add_common(eval, eval_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_args);
    if (imp->parsed()) return run_impute(imp_args, imp_in);
    if (train->parsed()) return run_train(train_args, train_in);
    if (explain->parsed()) {
      return run_explain(explain_args, explain_in, explain_prov, explain_model,
                         explain_row_flag);
    }
    if (eval->parsed()) return run_evaluate(eval_args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const StrategyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const MismatchError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
