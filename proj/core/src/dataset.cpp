#include "imprint/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_set>

#include "imprint/errors.hpp"
#include "imprint/text.hpp"

namespace imprint {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Dataset::Dataset(std::vector<ColumnMeta> columns, std::size_t n_rows)
    : columns_(std::move(columns)),
      n_rows_(n_rows),
      values_(n_rows * columns_.size(), kNaN),
      missing_(n_rows * columns_.size(), 1) {}

void Dataset::set_value(std::size_t i, std::size_t j, double v) {
  values_[i * columns_.size() + j] = v;
  missing_[i * columns_.size() + j] = 0;
}

void Dataset::set_missing(std::size_t i, std::size_t j) {
  values_[i * columns_.size() + j] = kNaN;
  missing_[i * columns_.size() + j] = 1;
}

std::size_t Dataset::missing_count(std::size_t j) const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n_rows_; ++i) count += missing_[i * columns_.size() + j];
  return count;
}

double Dataset::missing_rate(std::size_t j) const {
  if (n_rows_ == 0) return 0.0;
  return static_cast<double>(missing_count(j)) / static_cast<double>(n_rows_);
}

bool Dataset::any_missing() const {
  return std::any_of(missing_.begin(), missing_.end(), [](std::uint8_t m) { return m != 0; });
}

std::optional<std::size_t> Dataset::find_column(std::string_view name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].name == name) return j;
  }
  return std::nullopt;
}

std::size_t Dataset::require_column(std::string_view name) const {
  if (auto j = find_column(name)) return *j;
  throw DataError("column not found: '" + std::string(name) + "'");
}

std::optional<std::size_t> Dataset::target_index() const {
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].role == ColumnRole::Target) return j;
  }
  return std::nullopt;
}

std::vector<std::size_t> Dataset::feature_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].role == ColumnRole::Feature) out.push_back(j);
  }
  return out;
}

std::vector<std::string> Dataset::feature_names() const {
  std::vector<std::string> out;
  for (const auto& c : columns_) {
    if (c.role == ColumnRole::Feature) out.push_back(c.name);
  }
  return out;
}

std::vector<double> Dataset::row(std::size_t i, std::span<const std::size_t> cols) const {
  std::vector<double> out;
  out.reserve(cols.size());
  for (std::size_t j : cols) {
    out.push_back(is_missing(i, j) ? kNaN : values_[i * columns_.size() + j]);
  }
  return out;
}

std::vector<double> Dataset::feature_row(std::size_t i) const {
  auto feats = feature_indices();
  return row(i, feats);
}

std::vector<double> Dataset::observed_values(std::size_t j) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < n_rows_; ++i) {
    if (!is_missing(i, j)) out.push_back(value(i, j));
  }
  return out;
}

std::vector<double> Dataset::target_values() const {
  auto t = target_index();
  if (!t) throw DataError("dataset has no target column");
  std::vector<double> out;
  out.reserve(n_rows_);
  for (std::size_t i = 0; i < n_rows_; ++i) {
    if (is_missing(i, *t)) {
      throw DataError("missing target cell at row " + std::to_string(i));
    }
    out.push_back(value(i, *t));
  }
  return out;
}

Dataset Dataset::select_columns(std::span<const std::size_t> cols) const {
  std::vector<ColumnMeta> metas;
  metas.reserve(cols.size());
  for (std::size_t j : cols) metas.push_back(columns_[j]);
  Dataset out(std::move(metas), n_rows_);
  for (std::size_t i = 0; i < n_rows_; ++i) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (!is_missing(i, cols[k])) out.set_value(i, k, value(i, cols[k]));
    }
  }
  return out;
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  Dataset out(columns_, rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (!is_missing(rows[r], j)) out.set_value(r, j, value(rows[r], j));
    }
  }
  return out;
}

void Dataset::validate() const {
  std::unordered_set<std::string_view> seen;
  std::size_t targets = 0;
  for (const auto& c : columns_) {
    if (c.name.empty()) throw DataError("empty column name");
    if (!seen.insert(c.name).second) {
      throw DataError("duplicate column name: '" + c.name + "'");
    }
    if (c.role == ColumnRole::Target) ++targets;
  }
  if (targets > 1) throw DataError("more than one target column");
}

bool Dataset::identical_schema(const Dataset& other) const {
  if (columns_.size() != other.columns_.size()) return false;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].name != other.columns_[j].name) return false;
    if (columns_[j].role != other.columns_[j].role) return false;
  }
  return true;
}

char origin_code(CellOrigin o) {
  switch (o) {
    case CellOrigin::Observed: return 'O';
    case CellOrigin::Imputed: return 'I';
    case CellOrigin::Indicator: return 'N';
  }
  return '?';
}

CellOrigin parse_origin(char c) {
  switch (c) {
    case 'O': return CellOrigin::Observed;
    case 'I': return CellOrigin::Imputed;
    case 'N': return CellOrigin::Indicator;
    default: throw DataError(std::string("bad provenance code: '") + c + "'");
  }
}

ProvenanceMask::ProvenanceMask(std::size_t n_rows, std::size_t n_cols, CellOrigin fill)
    : n_rows_(n_rows), n_cols_(n_cols), cells_(n_rows * n_cols, fill) {}

std::vector<CellOrigin> ProvenanceMask::row(std::size_t i) const {
  return {cells_.begin() + i * n_cols_, cells_.begin() + (i + 1) * n_cols_};
}

std::vector<CellOrigin> ProvenanceMask::row(std::size_t i,
                                            std::span<const std::size_t> cols) const {
  std::vector<CellOrigin> out;
  out.reserve(cols.size());
  for (std::size_t j : cols) out.push_back(origin(i, j));
  return out;
}

bool ProvenanceMask::any_nonobserved() const {
  return std::any_of(cells_.begin(), cells_.end(),
                     [](CellOrigin o) { return o != CellOrigin::Observed; });
}

double stable_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += v;
  return sum;
}

double stable_mean(std::vector<double> values) {
  if (values.empty()) return 0;
  auto n = values.size();
  return stable_sum(std::move(values)) / static_cast<double>(n);
}

ColumnStats column_stats(const Dataset& ds, std::size_t col, double trim) {
  if (trim < 0 || trim >= 0.5) {
    throw DataError("trim fraction must be in [0, 0.5), got " + format_double(trim));
  }
  std::vector<double> obs = ds.observed_values(col);
  if (obs.empty()) {
    throw DataError("column '" + ds.column(col).name + "' has no observed cells");
  }
  std::sort(obs.begin(), obs.end());

  ColumnStats s;
  s.n_observed = obs.size();
  s.trim = trim;
  s.min = obs.front();
  s.max = obs.back();

  const auto n = obs.size();
  double sum = 0;
  for (double v : obs) sum += v;
  s.mean = sum / static_cast<double>(n);

  s.median = (n % 2 == 1) ? obs[n / 2] : 0.5 * (obs[n / 2 - 1] + obs[n / 2]);

  const auto drop = static_cast<std::size_t>(std::floor(trim * static_cast<double>(n)));
  if (2 * drop >= n) {
    // trim < 0.5 guarantees at least one value survives unless n is tiny;
    // fall back to the plain mean in that case
    s.truncated_mean = s.mean;
  } else {
    double tsum = 0;
    for (std::size_t i = drop; i < n - drop; ++i) tsum += obs[i];
    s.truncated_mean = tsum / static_cast<double>(n - 2 * drop);
  }

  if (n >= 2) {
    double ss = 0;
    for (double v : obs) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return s;
}

Dataset drop_high_missing(const Dataset& ds, double threshold) {
  if (threshold <= 0 || threshold > 1) {
    throw DataError("drop threshold must be in (0, 1], got " + format_double(threshold));
  }
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < ds.n_cols(); ++j) {
    if (ds.column(j).role != ColumnRole::Feature || ds.missing_rate(j) <= threshold) {
      keep.push_back(j);
    }
  }
  return ds.select_columns(keep);
}

TrainTestSplit split_train_test(const Dataset& ds, double test_fraction,
                                std::uint64_t seed) {
  if (test_fraction <= 0 || test_fraction >= 1) {
    throw DataError("test_fraction must be in (0, 1), got " + format_double(test_fraction));
  }
  const std::size_t n = ds.n_rows();
  if (n < 2) throw DataError("need at least 2 rows to split");
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test == n) {
    throw DataError("degenerate split: test_fraction " + format_double(test_fraction) +
                    " leaves one side empty for " + std::to_string(n) + " rows");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  TrainTestSplit split;
  split.test_rows.assign(order.begin(), order.begin() + n_test);
  split.train_rows.assign(order.begin() + n_test, order.end());
  // keep original relative row order within each side
  std::sort(split.test_rows.begin(), split.test_rows.end());
  std::sort(split.train_rows.begin(), split.train_rows.end());
  split.train = ds.select_rows(split.train_rows);
  split.test = ds.select_rows(split.test_rows);
  return split;
}

}  // namespace imprint
