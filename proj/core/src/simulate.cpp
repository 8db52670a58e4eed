#include "imprint/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "imprint/errors.hpp"
#include "imprint/text.hpp"

namespace imprint {

namespace {

void check_rate(double rate, const char* what) {
  if (rate < 0 || rate > 1 || !std::isfinite(rate)) {
    throw ConfigError(std::string(what) + " must be in [0, 1], got " + format_double(rate));
  }
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.n_rows < 1) throw ConfigError("synth.n_rows must be >= 1");
  if (spec.coefficients.empty()) throw ConfigError("synth.coefficients must be non-empty");
  if (spec.noise_std < 0 || !std::isfinite(spec.noise_std)) {
    throw ConfigError("synth.noise_std must be a nonnegative number");
  }
  if (spec.feature_correlation < 0 || spec.feature_correlation >= 1) {
    throw ConfigError("synth.feature_correlation must be in [0, 1)");
  }
  if (spec.group) {
    check_rate(spec.group->fraction, "synth.group.fraction");
    if (!spec.group->feature_shifts.empty() &&
        spec.group->feature_shifts.size() != spec.coefficients.size()) {
      throw ConfigError("synth.group.feature_shifts must match the feature count");
    }
  }
}

void validate(const MissingnessSpec& spec) {
  if (spec.columns.empty()) throw ConfigError("missingness.columns must be non-empty");
  if (const auto* mcar = std::get_if<McarSpec>(&spec.mechanism)) {
    check_rate(mcar->rate, "missingness.rate");
  } else if (const auto* mar = std::get_if<MarSpec>(&spec.mechanism)) {
    if (mar->driver.empty()) throw ConfigError("missingness.driver must be set");
    if (!std::isfinite(mar->threshold)) throw ConfigError("missingness.threshold must be finite");
    check_rate(mar->rate_below, "missingness.rate_below");
    check_rate(mar->rate_above, "missingness.rate_above");
    if (std::find(spec.columns.begin(), spec.columns.end(), mar->driver) !=
        spec.columns.end()) {
      throw ConfigError("missingness.driver cannot be one of the masked columns");
    }
  } else if (const auto* nmar = std::get_if<NmarSpec>(&spec.mechanism)) {
    if (!std::isfinite(nmar->self_threshold)) {
      throw ConfigError("missingness.self_threshold must be finite");
    }
    check_rate(nmar->rate_low, "missingness.rate_low");
    check_rate(nmar->rate_high, "missingness.rate_high");
  }
}

const char* mechanism_name(const MissingnessSpec& spec) {
  if (std::holds_alternative<McarSpec>(spec.mechanism)) return "mcar";
  if (std::holds_alternative<MarSpec>(spec.mechanism)) return "mar";
  return "nmar";
}

Dataset synth_generate(const SynthSpec& spec) {
  validate(spec);
  const std::size_t d = spec.coefficients.size();

  std::vector<ColumnMeta> metas;
  metas.reserve(d + 2);
  for (std::size_t j = 0; j < d; ++j) {
    metas.push_back({spec.feature_prefix + std::to_string(j), ColumnRole::Feature, {}});
  }
  metas.push_back({spec.target_name, ColumnRole::Target, {}});
  if (spec.group) metas.push_back({spec.group_name, ColumnRole::GroupLabel, {}});

  Dataset ds(std::move(metas), spec.n_rows);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const double corr = spec.feature_correlation;
  const double shared_scale = std::sqrt(corr);
  const double own_scale = std::sqrt(1.0 - corr);

  // fixed draw order per row: group label, shared factor, features, noise
  for (std::size_t i = 0; i < spec.n_rows; ++i) {
    double group_label = 0;
    if (spec.group) group_label = unif(rng) < spec.group->fraction ? 1.0 : 0.0;

    double shared = corr > 0 ? gauss(rng) : 0.0;

    double linear = 0;
    for (std::size_t j = 0; j < d; ++j) {
      double x = shared_scale * shared + own_scale * gauss(rng);
      if (spec.group && group_label == 1.0 && !spec.group->feature_shifts.empty()) {
        x += spec.group->feature_shifts[j];
      }
      ds.set_value(i, j, x);
      linear += spec.coefficients[j] * x;
    }

    double y = linear;
    if (spec.group && group_label == 1.0) y += spec.group->target_shift;
    if (spec.noise_std > 0) y += spec.noise_std * gauss(rng);
    ds.set_value(i, d, y);
    if (spec.group) ds.set_value(i, d + 1, group_label);
  }
  return ds;
}

MaskedData apply_missingness(const Dataset& ds, const MissingnessSpec& spec,
                             std::uint64_t seed) {
  validate(spec);

  std::vector<std::size_t> cols;
  cols.reserve(spec.columns.size());
  for (const auto& name : spec.columns) cols.push_back(ds.require_column(name));
  std::sort(cols.begin(), cols.end());

  for (std::size_t j : cols) {
    if (!ds.fully_observed(j)) {
      throw DataError("masked column '" + ds.column(j).name +
                      "' already has missing cells");
    }
  }

  std::size_t driver_col = 0;
  const auto* mar = std::get_if<MarSpec>(&spec.mechanism);
  if (mar) {
    driver_col = ds.require_column(mar->driver);
    if (!ds.fully_observed(driver_col)) {
      throw DataError("MAR driver column '" + mar->driver + "' has missing cells");
    }
  }

  MaskedData out{ds, ds};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // one draw per (column, row) in ascending column then row order; only the
  // mechanism's own inputs enter the decision
  for (std::size_t j : cols) {
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      const double u = unif(rng);
      double p = 0;
      if (const auto* mcar = std::get_if<McarSpec>(&spec.mechanism)) {
        p = mcar->rate;
      } else if (mar) {
        p = ds.value(i, driver_col) > mar->threshold ? mar->rate_above : mar->rate_below;
      } else {
        const auto& nmar = std::get<NmarSpec>(spec.mechanism);
        p = ds.value(i, j) > nmar.self_threshold ? nmar.rate_high : nmar.rate_low;
      }
      if (u < p) out.masked.set_missing(i, j);
    }
  }
  return out;
}

double expected_missing_rate(const Dataset& ds, const MissingnessSpec& spec) {
  validate(spec);
  if (const auto* mcar = std::get_if<McarSpec>(&spec.mechanism)) return mcar->rate;

  double total = 0;
  std::size_t cells = 0;
  for (const auto& name : spec.columns) {
    const std::size_t j = ds.require_column(name);
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      if (const auto* mar = std::get_if<MarSpec>(&spec.mechanism)) {
        const std::size_t dcol = ds.require_column(mar->driver);
        total += ds.value(i, dcol) > mar->threshold ? mar->rate_above : mar->rate_below;
      } else {
        const auto& nmar = std::get<NmarSpec>(spec.mechanism);
        total += ds.value(i, j) > nmar.self_threshold ? nmar.rate_high : nmar.rate_low;
      }
      ++cells;
    }
  }
  return cells ? total / static_cast<double>(cells) : 0.0;
}

}  // namespace imprint
