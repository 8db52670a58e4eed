#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imprint/explain.hpp"
#include "imprint/impute.hpp"
#include "imprint/model.hpp"
#include "imprint/simulate.hpp"
#include "imprint/tree.hpp"

namespace imprint {

enum class ExplainerKind : std::uint8_t { Shapley, Lime };

/// CSV data source with optional role columns.
struct CsvSource {
  std::string path;
  std::string target;
  std::string missing_token;
  std::optional<std::string> group;   // ColumnRole::GroupLabel
  std::optional<std::string> cohort;  // ColumnRole::CohortKey
};

struct DriftSection {
  ImputationStrategy strategy = CentralStrategy{};
  ModelFamily model = ModelFamily::Linear;
  std::size_t n_explain_rows = 50;
};

struct FairnessSection {
  ImputationStrategy strategy = CentralStrategy{};
  ModelFamily model = ModelFamily::Linear;
};

struct ShiftSection {
  double factor = 2.0;
  ModelFamily model = ModelFamily::Boosted;
};

/// Schema-versioned experiment definition shared by every CLI subcommand.
/// Parsing is strict: unknown keys are rejected so experiment files stay
/// auditable.
struct ExperimentConfig {
  int schema_version = 1;
  std::uint64_t seed = 0;

  std::optional<SynthSpec> synth;  // exactly one of synth / csv
  std::optional<CsvSource> csv;

  std::optional<MissingnessSpec> missingness;
  double test_fraction = 0.25;
  /// Feature columns with a higher training missing rate are dropped before
  /// the strategy comparison; absent disables the rule.
  std::optional<double> drop_missing_above = 0.5;

  std::vector<ImputationStrategy> strategies;
  std::vector<ModelFamily> models;
  TrainParams train;

  ExplainerKind explainer = ExplainerKind::Shapley;
  LimeParams lime;
  std::size_t top_k = 5;

  std::optional<DriftSection> drift;
  std::optional<FairnessSection> fairness;
  std::optional<ShiftSection> shift;

  std::optional<std::size_t> row_index;          // explain subcommand
  std::optional<ImputationStrategy> strategy;    // impute subcommand
  std::optional<ModelFamily> model;              // train subcommand
  std::string out_dir;
};

/// Parses and validates a JSON config document. Errors name the offending
/// key path; parse errors carry the line. Throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Schema-checks an already-parsed config (ranges, required sections).
void validate(const ExperimentConfig& config);

}  // namespace imprint
