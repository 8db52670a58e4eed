#include <string>
#include <variant>

#include "doctest.h"
#include "imprint/config.hpp"
#include "imprint/errors.hpp"

using namespace imprint;

namespace {

const char* kFullDoc = R"({
  "schema_version": 1,
  "seed": 42,
  "data": {
    "synth": {
      "n_rows": 500,
      "coefficients": [3.0, 2.5, 1.0],
      "noise_std": 0.5,
      "feature_correlation": 0.6,
      "seed": 7,
      "group": {"fraction": 0.3, "target_shift": 1.0, "feature_shifts": [1.5, 0.0, 0.0]}
    }
  },
  "missingness": {"mechanism": "mar", "columns": ["x0"], "driver": "y",
                  "threshold": 0.0, "rate_below": 0.1, "rate_above": 0.7},
  "test_fraction": 0.2,
  "drop_missing_above": 0.5,
  "strategies": ["complete-case", "indicator", "central-mean",
                 {"kind": "mice", "max_iter": 15, "tol": 0.0001}],
  "models": ["linear", "boosted"],
  "train": {"max_depth": 3, "min_leaf_rows": 10, "n_trees": 50, "learning_rate": 0.1},
  "explainer": "lime",
  "lime": {"n_samples": 2000, "kernel_width": 1.5, "perturbation_std_scale": 0.5, "seed": 3},
  "top_k": 4,
  "drift": {"strategy": "central-median", "model": "boosted", "n_explain_rows": 25},
  "fairness": {"strategy": "central-mean", "model": "linear"},
  "shift": {"factor": 2.0, "model": "boosted"}
})";

std::string expect_config_error(const std::string& text) {
  try {
    parse_config(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("a full document parses into every section") {
  auto config = parse_config(kFullDoc);
  CHECK(config.seed == 42);
  REQUIRE(config.synth.has_value());
  CHECK(config.synth->n_rows == 500);
  CHECK(config.synth->coefficients.size() == 3);
  CHECK(config.synth->feature_correlation == 0.6);
  REQUIRE(config.synth->group.has_value());
  CHECK(config.synth->group->fraction == 0.3);
  CHECK(config.synth->group->feature_shifts.size() == 3);

  REQUIRE(config.missingness.has_value());
  const auto* mar = std::get_if<MarSpec>(&config.missingness->mechanism);
  REQUIRE(mar != nullptr);
  CHECK(mar->driver == "y");
  CHECK(mar->rate_above == 0.7);

  CHECK(config.test_fraction == 0.2);
  CHECK(config.drop_missing_above == 0.5);
  REQUIRE(config.strategies.size() == 4);
  CHECK(std::holds_alternative<CompleteCaseStrategy>(config.strategies[0]));
  CHECK(std::holds_alternative<IndicatorStrategy>(config.strategies[1]));
  const auto* central = std::get_if<CentralStrategy>(&config.strategies[2]);
  REQUIRE(central != nullptr);
  CHECK(central->measure == CentralMeasure::Mean);
  const auto* mice = std::get_if<MiceStrategy>(&config.strategies[3]);
  REQUIRE(mice != nullptr);
  CHECK(mice->max_iter == 15);
  CHECK(mice->tol == 0.0001);

  CHECK(config.models == std::vector<ModelFamily>{ModelFamily::Linear, ModelFamily::Boosted});
  CHECK(config.train.n_trees == 50);
  CHECK(config.explainer == ExplainerKind::Lime);
  CHECK(config.lime.n_samples == 2000);
  CHECK(config.top_k == 4);
  REQUIRE(config.drift.has_value());
  CHECK(config.drift->n_explain_rows == 25);
  const auto* drift_central = std::get_if<CentralStrategy>(&config.drift->strategy);
  REQUIRE(drift_central != nullptr);
  CHECK(drift_central->measure == CentralMeasure::Median);
  REQUIRE(config.shift.has_value());
  CHECK(config.shift->factor == 2.0);
}

TEST_CASE("defaults fill everything the document leaves out") {
  auto config = parse_config(R"({"data": {"synth": {"n_rows": 10, "coefficients": [1.0]}}})");
  CHECK(config.schema_version == 1);
  CHECK(config.seed == 0);
  CHECK(config.test_fraction == 0.25);
  CHECK(config.drop_missing_above == 0.5);
  CHECK(config.strategies.empty());
  CHECK(config.explainer == ExplainerKind::Shapley);
  CHECK(config.top_k == 5);
  CHECK_FALSE(config.missingness.has_value());
  CHECK_FALSE(config.drift.has_value());
  CHECK(config.train.max_depth == 4);
}

TEST_CASE("unknown keys are named with their full path") {
  auto top = expect_config_error(
      R"({"data": {"synth": {"n_rows": 10, "coefficients": [1.0]}}, "bogus": 1})");
  CHECK(top.find("'bogus'") != std::string::npos);

  auto nested = expect_config_error(
      R"({"data": {"synth": {"n_rows": 10, "coefficients": [1.0], "rows": 5}}})");
  CHECK(nested.find("'data.synth.rows'") != std::string::npos);

  auto in_train = expect_config_error(
      R"({"data": {"synth": {"n_rows": 10, "coefficients": [1.0]}},
          "train": {"trees": 5}})");
  CHECK(in_train.find("'train.trees'") != std::string::npos);
}

TEST_CASE("type errors name the offending path") {
  auto msg = expect_config_error(
      R"({"data": {"synth": {"n_rows": "many", "coefficients": [1.0]}}})");
  CHECK(msg.find("data.synth.n_rows") != std::string::npos);
  CHECK(msg.find("integer") != std::string::npos);

  auto seed = expect_config_error(
      R"({"seed": -3, "data": {"synth": {"n_rows": 10, "coefficients": [1.0]}}})");
  CHECK(seed.find("seed") != std::string::npos);
}

TEST_CASE("out-of-range rates are rejected by name") {
  auto msg = expect_config_error(
      R"({"data": {"synth": {"n_rows": 10, "coefficients": [1.0]}},
          "missingness": {"mechanism": "mcar", "columns": ["x0"], "rate": 1.5}})");
  CHECK(msg.find("missingness.rate") != std::string::npos);
  CHECK(msg.find("1.5") != std::string::npos);
}

TEST_CASE("mechanism-specific keys cannot leak across mechanisms") {
  auto msg = expect_config_error(
      R"({"data": {"synth": {"n_rows": 10, "coefficients": [1.0]}},
          "missingness": {"mechanism": "mcar", "columns": ["x0"], "rate": 0.2,
                          "driver": "y"}})");
  CHECK(msg.find("missingness.driver") != std::string::npos);
  CHECK(msg.find("mcar") != std::string::npos);
}

TEST_CASE("a null drop threshold disables the rule") {
  auto config = parse_config(
      R"({"data": {"synth": {"n_rows": 10, "coefficients": [1.0]}},
          "drop_missing_above": null})");
  CHECK_FALSE(config.drop_missing_above.has_value());

  auto zero = expect_config_error(
      R"({"data": {"synth": {"n_rows": 10, "coefficients": [1.0]}},
          "drop_missing_above": 0})");
  CHECK(zero.find("drop_missing_above") != std::string::npos);
}

TEST_CASE("strategy array entries report their index") {
  auto msg = expect_config_error(
      R"({"data": {"synth": {"n_rows": 10, "coefficients": [1.0]}},
          "strategies": ["central-mean", "central-mode"]})");
  CHECK(msg.find("strategies[1]") != std::string::npos);

  auto kind = expect_config_error(
      R"({"data": {"synth": {"n_rows": 10, "coefficients": [1.0]}},
          "strategies": [{"kind": "drop"}]})");
  CHECK(kind.find("strategies[0].kind") != std::string::npos);
}

TEST_CASE("data must name exactly one source") {
  auto none = expect_config_error(R"({"data": {}})");
  CHECK(none.find("synth") != std::string::npos);

  auto both = expect_config_error(
      R"({"data": {"synth": {"n_rows": 10, "coefficients": [1.0]},
                   "csv": {"path": "a.csv", "target": "y"}}})");
  CHECK(both.find("exactly one") != std::string::npos);

  CHECK_THROWS_AS(parse_config(R"({"seed": 1})"), ConfigError);
}

TEST_CASE("parse errors carry the line number") {
  auto msg = expect_config_error("{\n  \"seed\": 1,\n  oops\n}");
  CHECK(msg.find("line 3") != std::string::npos);
}

TEST_CASE("schema_version other than 1 is refused") {
  auto msg = expect_config_error(
      R"({"schema_version": 2, "data": {"synth": {"n_rows": 10, "coefficients": [1.0]}}})");
  CHECK(msg.find("schema_version") != std::string::npos);
}

TEST_CASE("strategy object forms parse their options") {
  auto config = parse_config(
      R"({"data": {"synth": {"n_rows": 10, "coefficients": [1.0, 1.0]}},
          "strategies": [{"kind": "central", "measure": "truncated-mean",
                          "cohort": "site", "trim": 0.2},
                         {"kind": "indicator", "columns": ["x0"]}]})");
  const auto* central = std::get_if<CentralStrategy>(&config.strategies[0]);
  REQUIRE(central != nullptr);
  CHECK(central->measure == CentralMeasure::TruncatedMean);
  CHECK(central->cohort_key == "site");
  CHECK(central->trim == 0.2);
  const auto* indicator = std::get_if<IndicatorStrategy>(&config.strategies[1]);
  REQUIRE(indicator != nullptr);
  CHECK(indicator->columns == std::vector<std::string>{"x0"});
}

TEST_CASE("single-command fields parse when present") {
  auto config = parse_config(
      R"({"data": {"synth": {"n_rows": 10, "coefficients": [1.0]}},
          "strategy": "central-median", "model": "tree", "row_index": 3,
          "out_dir": "results"})");
  REQUIRE(config.strategy.has_value());
  CHECK(std::holds_alternative<CentralStrategy>(*config.strategy));
  CHECK(config.model == ModelFamily::Tree);
  CHECK(config.row_index == 3);
  CHECK(config.out_dir == "results");
}
