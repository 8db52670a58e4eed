#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "imprint/dataset.hpp"
#include "imprint/errors.hpp"
#include "imprint/simulate.hpp"

using namespace imprint;
using testutil::feature;
using testutil::kNA;
using testutil::make_table;

namespace {

SynthSpec basic_spec(std::size_t n, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_rows = n;
  spec.coefficients = {2.0, -1.0, 0.5};
  spec.noise_std = 0.0;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("noiseless targets equal the linear combination bit for bit") {
  auto spec = basic_spec(200, 17);
  auto ds = synth_generate(spec);
  REQUIRE(ds.n_cols() == 4);
  auto yi = ds.target_index();
  REQUIRE(yi.has_value());
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    // Same accumulation order as the generator: coefficient index ascending.
    double acc = 0;
    for (std::size_t j = 0; j < spec.coefficients.size(); ++j)
      acc += spec.coefficients[j] * ds.value(i, j);
    CHECK(ds.value(i, *yi) == acc);
  }
}

TEST_CASE("generation is deterministic per seed and diverges across seeds") {
  auto spec = basic_spec(100, 5);
  spec.noise_std = 1.0;
  auto a = synth_generate(spec);
  auto b = synth_generate(spec);
  CHECK(testutil::same_cells(a, b));

  spec.seed = 6;
  auto c = synth_generate(spec);
  bool differs = false;
  for (std::size_t i = 0; i < a.n_rows() && !differs; ++i)
    differs = a.value(i, 0) != c.value(i, 0);
  CHECK(differs);
}

TEST_CASE("feature moments and correlation land near their nominal values") {
  SynthSpec spec;
  spec.n_rows = 10000;
  spec.coefficients = {1.0, 1.0};
  spec.noise_std = 0.5;
  spec.feature_correlation = 0.6;
  spec.seed = 33;
  auto ds = synth_generate(spec);

  auto s0 = column_stats(ds, 0);
  auto s1 = column_stats(ds, 1);
  CHECK(std::abs(s0.mean) < 0.05);
  CHECK(s0.stddev == doctest::Approx(1.0).epsilon(0.05));
  CHECK(s1.stddev == doctest::Approx(1.0).epsilon(0.05));

  double cov = 0;
  for (std::size_t i = 0; i < ds.n_rows(); ++i)
    cov += (ds.value(i, 0) - s0.mean) * (ds.value(i, 1) - s1.mean);
  cov /= double(ds.n_rows() - 1);
  double corr = cov / (s0.stddev * s1.stddev);
  CHECK(corr == doctest::Approx(0.6).epsilon(0.07));
}

TEST_CASE("group labels shift target and features for the labeled rows") {
  SynthSpec spec;
  spec.n_rows = 8000;
  spec.coefficients = {1.0};
  spec.noise_std = 0.0;
  spec.seed = 9;
  GroupSpec group;
  group.fraction = 0.3;
  group.target_shift = 10.0;
  group.feature_shifts = {4.0};
  spec.group = group;

  auto ds = synth_generate(spec);
  auto gi = ds.require_column("group");
  CHECK(ds.column(gi).role == ColumnRole::GroupLabel);

  std::size_t n1 = 0;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    double g = ds.value(i, gi);
    REQUIRE((g == 0.0 || g == 1.0));
    if (g == 1.0) ++n1;
    // Noiseless: y = x + target_shift * g exactly, shift already inside x.
    double expect = ds.value(i, 0) + group.target_shift * g;
    CHECK(ds.value(i, 1) == doctest::Approx(expect).epsilon(1e-12));
  }
  double frac = double(n1) / double(ds.n_rows());
  CHECK(std::abs(frac - 0.3) < 4 * std::sqrt(0.3 * 0.7 / double(ds.n_rows())));

  // Labeled rows should sit visibly higher in feature space.
  double sum1 = 0, sum0 = 0;
  for (std::size_t i = 0; i < ds.n_rows(); ++i)
    (ds.value(i, gi) == 1.0 ? sum1 : sum0) += ds.value(i, 0);
  CHECK(sum1 / double(n1) - sum0 / double(ds.n_rows() - n1) ==
        doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("mcar endpoints are exact and interior rates concentrate") {
  auto complete = synth_generate(basic_spec(2000, 21));
  MissingnessSpec none;
  none.mechanism = McarSpec{0.0};
  none.columns = {"x0", "x1"};
  auto kept = apply_missingness(complete, none, 1);
  CHECK_FALSE(kept.masked.any_missing());
  CHECK(testutil::same_cells(kept.masked, complete));
  CHECK(testutil::same_cells(kept.ground_truth, complete));

  MissingnessSpec all;
  all.mechanism = McarSpec{1.0};
  all.columns = {"x0"};
  auto wiped = apply_missingness(complete, all, 1);
  CHECK(wiped.masked.missing_count(0) == complete.n_rows());
  CHECK(wiped.masked.fully_observed(1));

  MissingnessSpec half;
  half.mechanism = McarSpec{0.4};
  half.columns = {"x0"};
  auto some = apply_missingness(complete, half, 7);
  double rate = some.masked.missing_rate(0);
  CHECK(std::abs(rate - 0.4) < 4 * std::sqrt(0.4 * 0.6 / double(complete.n_rows())));
}

TEST_CASE("mar masks according to the driver side of the threshold") {
  auto ds = make_table({feature("drv"), feature("v")},
                       {{-1, 10}, {-2, 11}, {3, 12}, {4, 13}, {0, 14}});
  MissingnessSpec spec;
  MarSpec mar;
  mar.driver = "drv";
  mar.threshold = 0.0;
  mar.rate_below = 0.0;
  mar.rate_above = 1.0;
  spec.mechanism = mar;
  spec.columns = {"v"};

  auto out = apply_missingness(ds, spec, 3);
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    bool above = ds.value(i, 0) > 0.0;
    CHECK(out.masked.is_missing(i, 1) == above);
  }
  // Ground truth is byte-identical to the input.
  CHECK(testutil::same_cells(out.ground_truth, ds));
}

TEST_CASE("nmar thresholds on the cell's own value") {
  auto ds = make_table({feature("v")}, {{-5}, {-1}, {0}, {1}, {5}});
  MissingnessSpec spec;
  NmarSpec nmar;
  nmar.self_threshold = 0.0;
  nmar.rate_low = 1.0;
  nmar.rate_high = 0.0;
  spec.mechanism = nmar;
  spec.columns = {"v"};

  auto out = apply_missingness(ds, spec, 8);
  CHECK(out.masked.is_missing(0, 0));
  CHECK(out.masked.is_missing(1, 0));
  CHECK(out.masked.is_missing(2, 0));  // <= threshold counts as low
  CHECK_FALSE(out.masked.is_missing(3, 0));
  CHECK_FALSE(out.masked.is_missing(4, 0));
}

TEST_CASE("masking rejects columns that are already gappy") {
  auto ds = make_table({feature("a"), feature("b")}, {{kNA, 1}, {2, 3}});
  MissingnessSpec spec;
  spec.mechanism = McarSpec{0.5};
  spec.columns = {"a"};
  CHECK_THROWS_AS(apply_missingness(ds, spec, 1), DataError);

  // A MAR driver with gaps is just as unusable.
  MissingnessSpec mar;
  MarSpec m;
  m.driver = "a";
  mar.mechanism = m;
  mar.columns = {"b"};
  CHECK_THROWS_AS(apply_missingness(ds, mar, 1), DataError);
}

TEST_CASE("expected_missing_rate matches the mechanism's cell probabilities") {
  auto ds = make_table({feature("drv"), feature("v")},
                       {{-1, 1}, {-1, 2}, {2, 3}, {2, 4}});
  MissingnessSpec mcar;
  mcar.mechanism = McarSpec{0.25};
  mcar.columns = {"v"};
  CHECK(expected_missing_rate(ds, mcar) == doctest::Approx(0.25));

  MissingnessSpec mar;
  MarSpec m;
  m.driver = "drv";
  m.threshold = 0.0;
  m.rate_below = 0.1;
  m.rate_above = 0.9;
  mar.mechanism = m;
  mar.columns = {"v"};
  CHECK(expected_missing_rate(ds, mar) == doctest::Approx(0.5));
}

TEST_CASE("spec validation rejects nonsense") {
  SynthSpec empty;
  CHECK_THROWS_AS(validate(empty), ConfigError);

  auto bad_noise = basic_spec(10, 1);
  bad_noise.noise_std = -1;
  CHECK_THROWS_AS(validate(bad_noise), ConfigError);

  auto bad_corr = basic_spec(10, 1);
  bad_corr.feature_correlation = 1.0;
  CHECK_THROWS_AS(validate(bad_corr), ConfigError);

  auto bad_group = basic_spec(10, 1);
  bad_group.group = GroupSpec{};
  bad_group.group->fraction = 1.5;
  CHECK_THROWS_AS(validate(bad_group), ConfigError);

  auto bad_shifts = basic_spec(10, 1);
  bad_shifts.group = GroupSpec{};
  bad_shifts.group->feature_shifts = {1.0};  // arity mismatch vs 3 features
  CHECK_THROWS_AS(validate(bad_shifts), ConfigError);

  MissingnessSpec no_cols;
  no_cols.mechanism = McarSpec{0.5};
  CHECK_THROWS_AS(validate(no_cols), ConfigError);

  MissingnessSpec bad_rate;
  bad_rate.mechanism = McarSpec{1.5};
  bad_rate.columns = {"x"};
  CHECK_THROWS_AS(validate(bad_rate), ConfigError);

  MissingnessSpec self_drive;
  MarSpec sd;
  sd.driver = "x";
  self_drive.mechanism = sd;
  self_drive.columns = {"x"};
  CHECK_THROWS_AS(validate(self_drive), ConfigError);
}

TEST_CASE("mechanism_name reports the active variant") {
  MissingnessSpec spec;
  spec.mechanism = McarSpec{};
  CHECK(std::string(mechanism_name(spec)) == "mcar");
  spec.mechanism = MarSpec{};
  CHECK(std::string(mechanism_name(spec)) == "mar");
  spec.mechanism = NmarSpec{};
  CHECK(std::string(mechanism_name(spec)) == "nmar");
}
