#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "imprint/dataset.hpp"
#include "imprint/errors.hpp"
#include "imprint/impute.hpp"
#include "imprint/simulate.hpp"

using namespace imprint;
using testutil::feature;
using testutil::kNA;
using testutil::make_table;
using testutil::target;

TEST_CASE("indicator encoding maps presence, not magnitude") {
  auto ds = make_table({feature("a"), feature("b"), target("y")},
                       {{kNA, 7, 1}, {-3, kNA, 2}, {0.5, 9, 3}});
  auto out = indicator_encode(ds, {"a", "b"});

  CHECK(out.data.value(0, 0) == 0);
  CHECK(out.data.value(1, 0) == 1);
  CHECK(out.data.value(2, 0) == 1);
  CHECK(out.data.value(0, 1) == 1);
  CHECK(out.data.value(1, 1) == 0);
  CHECK(out.data.value(2, 1) == 1);
  // Target stays a real value.
  CHECK(out.data.value(1, 2) == 2);

  // Only cells that used to be missing carry the indicator origin.
  CHECK(out.provenance.origin(0, 0) == CellOrigin::Indicator);
  CHECK(out.provenance.origin(1, 1) == CellOrigin::Indicator);
  CHECK(out.provenance.origin(1, 0) == CellOrigin::Observed);
  CHECK(out.provenance.origin(1, 2) == CellOrigin::Observed);

  CHECK(out.data.column(0).transform == ColumnTransform::Indicator);
  CHECK(out.data.column(2).transform == ColumnTransform::None);
  CHECK(out.provenance.strategy() == "indicator");
}

TEST_CASE("indicator with an empty list picks every gappy feature") {
  auto ds = make_table({feature("a"), feature("b"), target("y")},
                       {{kNA, 7, 1}, {2, 8, kNA}});
  auto out = indicator_encode(ds, {});
  CHECK(out.data.column(0).transform == ColumnTransform::Indicator);
  CHECK(out.data.column(1).transform == ColumnTransform::None);
  CHECK(out.data.value(1, 1) == 8);
  // A gappy target is never indicator-coded, and stays missing.
  CHECK(out.data.is_missing(1, 2));
}

TEST_CASE("indicator rejects unknown and non-feature columns") {
  auto ds = make_table({feature("a"), target("y")}, {{kNA, 1}});
  CHECK_THROWS_AS(indicator_encode(ds, {"zzz"}), DataError);
  CHECK_THROWS_AS(indicator_encode(ds, {"y"}), StrategyError);

  // Leaving a gappy feature out of the selection would silently ship NaNs.
  auto two = make_table({feature("a"), feature("b"), target("y")},
                        {{kNA, kNA, 1}});
  CHECK_THROWS_AS(indicator_encode(two, {"a"}), StrategyError);
}

TEST_CASE("central fill writes the chosen statistic into missing cells only") {
  auto ds = make_table({feature("a"), target("y")},
                       {{1, 0}, {2, 0}, {kNA, 0}, {3, 0}, {100, 0}});
  auto mean = central_impute(ds, CentralMeasure::Mean);
  CHECK(mean.data.value(2, 0) == doctest::Approx(26.5));
  auto median = central_impute(ds, CentralMeasure::Median);
  CHECK(median.data.value(2, 0) == doctest::Approx(2.5));
  auto trimmed = central_impute(ds, CentralMeasure::TruncatedMean, {}, 0.25);
  CHECK(trimmed.data.value(2, 0) == doctest::Approx(2.5));

  // Observed cells are untouched bit for bit.
  for (std::size_t i : {std::size_t{0}, std::size_t{1}, std::size_t{3}, std::size_t{4}})
    CHECK(mean.data.value(i, 0) == ds.value(i, 0));
  CHECK(mean.provenance.origin(2, 0) == CellOrigin::Imputed);
  CHECK(mean.provenance.origin(0, 0) == CellOrigin::Observed);
  CHECK(mean.provenance.strategy() == "central-mean");
}

TEST_CASE("cohort central fill keeps cohorts separate") {
  auto ds = make_table({feature("a"), feature("c"), target("y")},
                       {{10, 0, 0}, {20, 0, 0}, {kNA, 0, 0},
                        {100, 1, 0}, {200, 1, 0}, {kNA, 1, 0}});
  ds.column(1).role = ColumnRole::CohortKey;

  auto out = central_impute(ds, CentralMeasure::Mean, std::string("c"));
  CHECK(out.data.value(2, 0) == doctest::Approx(15.0));
  CHECK(out.data.value(5, 0) == doctest::Approx(150.0));
  CHECK(out.provenance.strategy() == "central-mean-by-c");
}

TEST_CASE("a cohort with nothing observed is an error naming the cohort") {
  auto ds = make_table({feature("a"), feature("c"), target("y")},
                       {{10, 0, 0}, {20, 0, 0}, {kNA, 1, 0}});
  ds.column(1).role = ColumnRole::CohortKey;
  try {
    central_impute(ds, CentralMeasure::Mean, std::string("c"));
    FAIL("expected StrategyError");
  } catch (const StrategyError& e) {
    std::string msg = e.what();
    CHECK(msg.find('1') != std::string::npos);  // cohort id
    CHECK(msg.find('a') != std::string::npos);  // column name
  }
}

TEST_CASE("cohort key must exist and be fully observed") {
  auto ds = make_table({feature("a"), feature("c"), target("y")},
                       {{1, kNA, 0}, {kNA, 1, 0}});
  ds.column(1).role = ColumnRole::CohortKey;
  CHECK_THROWS_AS(central_impute(ds, CentralMeasure::Mean, std::string("nope")),
                  DataError);
  CHECK_THROWS_AS(central_impute(ds, CentralMeasure::Mean, std::string("c")),
                  StrategyError);
}

TEST_CASE("complete case keeps rows whose feature cells are all observed") {
  auto ds = make_table({feature("a"), feature("b"), target("y")},
                       {{1, 2, 0}, {kNA, 3, 1}, {4, 5, 2}, {6, kNA, 3}});
  auto out = complete_case(ds);
  REQUIRE(out.data.n_rows() == 2);
  CHECK(out.data.value(0, 2) == 0);
  CHECK(out.data.value(1, 2) == 2);
  CHECK_FALSE(out.provenance.any_nonobserved());
  CHECK(out.provenance.strategy() == "complete-case");

  // A missing target does not delete a row; only features count.
  auto ds2 = make_table({feature("a"), target("y")}, {{1, kNA}, {2, 0}});
  CHECK(complete_case(ds2).data.n_rows() == 2);

  // Nothing survives: that is a strategy failure, not an empty dataset.
  auto ds3 = make_table({feature("a"), target("y")}, {{kNA, 0}, {kNA, 1}});
  CHECK_THROWS_AS(complete_case(ds3), StrategyError);
}

TEST_CASE("provenance marks exactly the formerly missing cells") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 25; ++trial) {
    auto ds = testutil::random_table(rng, 12 + trial, 3, 0.3);
    auto out = central_impute(ds, CentralMeasure::Median);
    REQUIRE_FALSE(out.data.any_missing());
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      for (std::size_t j = 0; j < ds.n_cols(); ++j) {
        auto expect = ds.is_missing(i, j) ? CellOrigin::Imputed : CellOrigin::Observed;
        CHECK(out.provenance.origin(i, j) == expect);
        if (!ds.is_missing(i, j)) CHECK(out.data.value(i, j) == ds.value(i, j));
      }
    }
  }
}

TEST_CASE("chained regression recovers an exact linear relation") {
  // y2 = 2 * y1 with no noise; fills should land on the line.
  std::mt19937_64 rng(41);
  std::normal_distribution<double> gauss(0, 1);
  std::uniform_real_distribution<double> unif(0, 1);
  const std::size_t n = 200;
  auto ds = make_table({feature("x"), feature("z")}, {});
  {
    std::vector<ColumnMeta> cols{feature("x"), feature("z")};
    ds = Dataset(cols, n);
    for (std::size_t i = 0; i < n; ++i) {
      double x = gauss(rng);
      ds.set_value(i, 0, x);
      if (unif(rng) < 0.2)
        ds.set_missing(i, 1);
      else
        ds.set_value(i, 1, 2 * x);
    }
  }

  MiceStrategy params;
  params.max_iter = 20;
  params.tol = 1e-10;
  auto out = mice_impute(ds, params);
  REQUIRE(out.trace.has_value());
  CHECK(out.trace->converged);
  CHECK(out.trace->final_delta <= params.tol);
  for (std::size_t i = 0; i < n; ++i) {
    if (ds.is_missing(i, 1)) {
      CHECK(out.data.value(i, 1) == doctest::Approx(2 * ds.value(i, 0)).epsilon(1e-9));
      CHECK(out.provenance.origin(i, 1) == CellOrigin::Imputed);
    } else {
      CHECK(out.data.value(i, 1) == ds.value(i, 1));
    }
  }
}

TEST_CASE("chained regression beats a pooled mean fill under noise") {
  SynthSpec spec;
  spec.n_rows = 1000;
  spec.coefficients = {2.0, 0.0};
  spec.noise_std = 0.0;
  spec.feature_correlation = 0.0;
  spec.seed = 77;
  auto complete = synth_generate(spec);
  // Use x1 := 2*x0 + noise as the column to shred, built deterministically.
  std::mt19937_64 rng(78);
  std::normal_distribution<double> gauss(0, 1);
  for (std::size_t i = 0; i < complete.n_rows(); ++i)
    complete.set_value(i, 1, 2 * complete.value(i, 0) + gauss(rng));

  MissingnessSpec miss;
  miss.mechanism = McarSpec{0.2};
  miss.columns = {"x1"};
  auto masked = apply_missingness(complete, miss, 79).masked;

  auto mice = mice_impute(masked, MiceStrategy{});
  auto mean = central_impute(masked, CentralMeasure::Mean);

  double err_mice = 0, err_mean = 0;
  std::size_t gaps = 0;
  for (std::size_t i = 0; i < masked.n_rows(); ++i) {
    if (!masked.is_missing(i, 1)) continue;
    ++gaps;
    err_mice += std::abs(mice.data.value(i, 1) - complete.value(i, 1));
    err_mean += std::abs(mean.data.value(i, 1) - complete.value(i, 1));
  }
  REQUIRE(gaps > 100);
  CHECK(err_mice / double(gaps) < err_mean / double(gaps));
}

TEST_CASE("a constant predictor column trips the singular fallback") {
  auto ds = make_table({feature("flat"), feature("v"), target("y")},
                       {{1, 5, 0}, {1, kNA, 0}, {1, 7, 0}, {1, kNA, 0}, {1, 6, 0}});
  auto out = mice_impute(ds, MiceStrategy{});
  REQUIRE(out.trace.has_value());
  bool flagged = false;
  for (const auto& sweep : out.trace->sweeps)
    for (auto col : sweep.fallback_columns) flagged |= (col == 1);
  CHECK(flagged);
  // The fallback is the observed mean of the column.
  CHECK(out.data.value(1, 1) == doctest::Approx(6.0));
}

TEST_CASE("chained regression needs at least two feature columns") {
  auto ds = make_table({feature("only"), target("y")}, {{kNA, 0}, {1, 1}});
  CHECK_THROWS_AS(mice_impute(ds, MiceStrategy{}), StrategyError);
}

TEST_CASE("fitted central fill carries train statistics to new rows") {
  auto train = make_table({feature("a"), target("y")},
                          {{10, 0}, {20, 0}, {kNA, 0}});
  auto fit = fit_imputer(train, CentralStrategy{CentralMeasure::Mean, {}, 0.1});
  CHECK(fit.train.data.value(2, 0) == doctest::Approx(15.0));

  // New rows with wildly different observed values still get the train mean.
  auto test = make_table({feature("a"), target("y")},
                         {{1000, 0}, {kNA, 0}, {2000, 0}});
  auto out = fit.imputer.apply(test);
  CHECK(out.data.value(1, 0) == doctest::Approx(15.0));
  CHECK(out.data.value(0, 0) == 1000);
  CHECK(out.provenance.origin(1, 0) == CellOrigin::Imputed);
}

TEST_CASE("fitted chained regression reuses train-time column models") {
  // Train teaches z = 2x; a test row with x observed and z missing should
  // be filled from that relation even though the test set alone is useless.
  std::vector<ColumnMeta> cols{feature("x"), feature("z")};
  Dataset train(cols, 50);
  std::mt19937_64 rng(55);
  std::normal_distribution<double> gauss(0, 1);
  for (std::size_t i = 0; i < 50; ++i) {
    double x = gauss(rng);
    train.set_value(i, 0, x);
    if (i % 5 == 0)
      train.set_missing(i, 1);
    else
      train.set_value(i, 1, 2 * x);
  }
  MiceStrategy params;
  params.max_iter = 25;
  params.tol = 1e-10;
  auto fit = fit_imputer(train, params);

  auto test = make_table({feature("x"), feature("z")}, {{3, kNA}, {-1, kNA}});
  auto out = fit.imputer.apply(test);
  CHECK(out.data.value(0, 1) == doctest::Approx(6.0).epsilon(1e-6));
  CHECK(out.data.value(1, 1) == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("a fitted imputer refuses rows with a different schema") {
  auto train = make_table({feature("a"), target("y")}, {{1, 0}, {kNA, 1}});
  auto fit = fit_imputer(train, CentralStrategy{});
  auto other = make_table({feature("b"), target("y")}, {{1, 0}});
  CHECK_THROWS_AS(fit.imputer.apply(other), MismatchError);
}

TEST_CASE("strategy names are stable identifiers") {
  CHECK(strategy_name(CompleteCaseStrategy{}) == "complete-case");
  CHECK(strategy_name(IndicatorStrategy{}) == "indicator");
  CHECK(strategy_name(CentralStrategy{}) == "central-mean");
  CHECK(strategy_name(CentralStrategy{CentralMeasure::Median, {}, 0.1}) ==
        "central-median");
  CHECK(strategy_name(CentralStrategy{CentralMeasure::TruncatedMean,
                                      std::string("site"), 0.1}) ==
        "central-truncated-mean-by-site");
  CHECK(strategy_name(MiceStrategy{}) == "mice");

  CHECK(parse_measure("mean") == CentralMeasure::Mean);
  CHECK(parse_measure("median") == CentralMeasure::Median);
  CHECK(parse_measure("truncated-mean") == CentralMeasure::TruncatedMean);
  CHECK_THROWS_AS(parse_measure("mode"), ConfigError);
}
