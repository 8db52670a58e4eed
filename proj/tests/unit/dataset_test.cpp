#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "imprint/dataset.hpp"
#include "imprint/errors.hpp"

using namespace imprint;
using testutil::feature;
using testutil::kNA;
using testutil::make_table;
using testutil::target;

TEST_CASE("column_stats on small hand-checked columns") {
  auto ds = make_table({feature("a"), feature("b")},
                       {{2, 1}, {4, 2}, {6, 3}, {8, 100}});

  auto a = column_stats(ds, 0);
  CHECK(a.mean == doctest::Approx(5.0));
  CHECK(a.median == doctest::Approx(5.0));
  CHECK(a.min == 2);
  CHECK(a.max == 8);
  CHECK(a.n_observed == 4);
  // sample std of {2,4,6,8}: sqrt(20/3)
  CHECK(a.stddev == doctest::Approx(std::sqrt(20.0 / 3.0)));

  auto b = column_stats(ds, 1, 0.25);
  // trim 0.25 of 4 drops one from each end: mean of {2, 3}
  CHECK(b.truncated_mean == doctest::Approx(2.5));
  CHECK(b.mean == doctest::Approx(26.5));
  CHECK(b.median == doctest::Approx(2.5));
}

TEST_CASE("column_stats ignores missing cells entirely") {
  auto base = make_table({feature("x")}, {{1}, {2}, {3}});
  auto padded = make_table({feature("x")}, {{1}, {2}, {kNA}, {3}, {kNA}});

  auto s0 = column_stats(base, 0);
  auto s1 = column_stats(padded, 0);
  CHECK(s0.mean == s1.mean);
  CHECK(s0.median == s1.median);
  CHECK(s0.stddev == s1.stddev);
  CHECK(s1.n_observed == 3);

  auto all_gone = make_table({feature("x")}, {{kNA}, {kNA}});
  CHECK_THROWS_AS(column_stats(all_gone, 0), DataError);
}

TEST_CASE("drop_high_missing keeps non-features and respects the threshold") {
  auto ds = make_table({feature("dense"), feature("gappy"), target("y")},
                       {{1, kNA, 0}, {2, kNA, 1}, {3, 5, 2}, {4, kNA, 3}});
  // gappy is 75% missing, y fully observed.
  auto kept = drop_high_missing(ds, 0.5);
  CHECK(kept.n_cols() == 2);
  CHECK(kept.column(0).name == "dense");
  CHECK(kept.column(1).name == "y");

  // Threshold at exactly the observed rate keeps the column (strict >).
  auto lax = drop_high_missing(ds, 0.75);
  CHECK(lax.n_cols() == 3);

  // Idempotent: a second pass changes nothing.
  auto twice = drop_high_missing(kept, 0.5);
  CHECK(twice.n_cols() == kept.n_cols());

  // Target survives even when fully missing beyond threshold.
  auto ds2 = make_table({feature("x"), target("y")}, {{1, kNA}, {2, kNA}});
  auto kept2 = drop_high_missing(ds2, 0.5);
  CHECK(kept2.find_column("y").has_value());
}

TEST_CASE("split_train_test partitions rows deterministically") {
  std::mt19937_64 rng(7);
  auto ds = testutil::random_table(rng, 40, 3, 0.1);

  auto sp = split_train_test(ds, 0.25, 99);
  CHECK(sp.test.n_rows() == 10);
  CHECK(sp.train.n_rows() == 30);
  CHECK(std::is_sorted(sp.train_rows.begin(), sp.train_rows.end()));
  CHECK(std::is_sorted(sp.test_rows.begin(), sp.test_rows.end()));

  std::vector<std::size_t> all = sp.train_rows;
  all.insert(all.end(), sp.test_rows.begin(), sp.test_rows.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);

  auto again = split_train_test(ds, 0.25, 99);
  CHECK(again.test_rows == sp.test_rows);
  auto other = split_train_test(ds, 0.25, 100);
  CHECK(other.test_rows != sp.test_rows);

  // Rows carry their cells over unchanged.
  for (std::size_t k = 0; k < sp.test_rows.size(); ++k) {
    auto src = sp.test_rows[k];
    for (std::size_t j = 0; j < ds.n_cols(); ++j) {
      CHECK(sp.test.is_missing(k, j) == ds.is_missing(src, j));
      if (!ds.is_missing(src, j)) CHECK(sp.test.value(k, j) == ds.value(src, j));
    }
  }

  CHECK_THROWS_AS(split_train_test(ds, 0.001, 1), DataError);
  CHECK_THROWS_AS(split_train_test(ds, 0.999, 1), DataError);
}

TEST_CASE("select_rows and select_columns preserve cells and metadata") {
  auto ds = make_table({feature("a"), target("y"), feature("b")},
                       {{1, 10, kNA}, {2, 20, 5}, {3, 30, 6}});
  std::vector<std::size_t> rows{2, 0};
  auto picked = ds.select_rows(rows);
  CHECK(picked.n_rows() == 2);
  CHECK(picked.value(0, 0) == 3);
  CHECK(picked.value(1, 0) == 1);
  CHECK(picked.is_missing(1, 2));

  std::vector<std::size_t> cols{1, 2};
  auto narrowed = ds.select_columns(cols);
  CHECK(narrowed.n_cols() == 2);
  CHECK(narrowed.column(0).role == ColumnRole::Target);
  CHECK(narrowed.column(1).name == "b");
  CHECK(narrowed.value(1, 0) == 20);
}

TEST_CASE("stable_sum does not depend on summand order") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-1, 1);
  std::vector<double> values(500);
  for (auto& v : values) v = unif(rng) * std::pow(10.0, int(unif(rng) * 8));

  double first = stable_sum(values);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(values.begin(), values.end(), rng);
    CHECK(stable_sum(values) == first);
  }
  CHECK(stable_mean(values) == first / double(values.size()));
}

TEST_CASE("row accessors expose NaN for missing cells") {
  auto ds = make_table({feature("a"), feature("b"), target("y")},
                       {{1, kNA, 9}, {kNA, 4, 8}});
  auto fr = ds.feature_row(0);
  REQUIRE(fr.size() == 2);
  CHECK(fr[0] == 1);
  CHECK(std::isnan(fr[1]));

  auto targets = ds.target_values();
  CHECK(targets == std::vector<double>{9, 8});

  auto gap = make_table({feature("a"), target("y")}, {{1, kNA}});
  CHECK_THROWS_AS(gap.target_values(), DataError);
}

TEST_CASE("origin codes round-trip and reject junk") {
  CHECK(origin_code(CellOrigin::Observed) == 'O');
  CHECK(origin_code(CellOrigin::Imputed) == 'I');
  CHECK(origin_code(CellOrigin::Indicator) == 'N');
  for (auto o : {CellOrigin::Observed, CellOrigin::Imputed, CellOrigin::Indicator})
    CHECK(parse_origin(origin_code(o)) == o);
  CHECK_THROWS_AS(parse_origin('x'), DataError);
}

TEST_CASE("validate flags duplicate names and extra targets") {
  auto ok = make_table({feature("a"), target("y")}, {{1, 2}});
  CHECK_NOTHROW(ok.validate());

  auto dup = make_table({feature("a"), feature("a")}, {{1, 2}});
  CHECK_THROWS_AS(dup.validate(), DataError);

  auto two = make_table({target("y"), target("z")}, {{1, 2}});
  CHECK_THROWS_AS(two.validate(), DataError);

  std::vector<ColumnMeta> cols{{"", ColumnRole::Feature, ColumnTransform::None}};
  Dataset unnamed(cols, 1);
  CHECK_THROWS_AS(unnamed.validate(), DataError);
}

TEST_CASE("missing bookkeeping and lookup helpers") {
  auto ds = make_table({feature("a"), feature("b")}, {{kNA, 1}, {2, 3}, {kNA, 4}});
  CHECK(ds.missing_count(0) == 2);
  CHECK(ds.missing_rate(0) == doctest::Approx(2.0 / 3.0));
  CHECK(ds.fully_observed(1));
  CHECK(ds.any_missing());

  CHECK(ds.find_column("b") == std::size_t{1});
  CHECK_FALSE(ds.find_column("zzz").has_value());
  CHECK(ds.require_column("a") == 0);
  CHECK_THROWS_AS(ds.require_column("zzz"), DataError);

  CHECK_FALSE(ds.target_index().has_value());
  auto with_target = make_table({feature("a"), target("y")}, {{1, 2}});
  CHECK(with_target.target_index() == std::size_t{1});
  CHECK(with_target.feature_indices() == std::vector<std::size_t>{0});
  CHECK(with_target.feature_names() == std::vector<std::string>{"a"});
}
