#pragma once

#include <cassert>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace imprint {

enum class ColumnRole : std::uint8_t { Feature, Target, GroupLabel, CohortKey };

/// Whole-column rewrite applied in place (presence/absence encoding).
enum class ColumnTransform : std::uint8_t { None, Indicator };

struct ColumnMeta {
  std::string name;
  ColumnRole role = ColumnRole::Feature;
  ColumnTransform transform = ColumnTransform::None;
};

/// Columnar numeric table with a per-cell missing mask.
///
/// Storage is row-major. A missing cell holds NaN and is never read except to
/// overwrite it; row() deliberately exposes NaN as the missing marker for
/// model input. Instances are treated as immutable once built and are safe to
/// share read-only across threads.
class Dataset {
public:
  Dataset() = default;
  Dataset(std::vector<ColumnMeta> columns, std::size_t n_rows);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return columns_.size(); }

  const std::vector<ColumnMeta>& columns() const { return columns_; }
  const ColumnMeta& column(std::size_t j) const { return columns_[j]; }
  ColumnMeta& column(std::size_t j) { return columns_[j]; }

  bool is_missing(std::size_t i, std::size_t j) const {
    return missing_[i * columns_.size() + j] != 0;
  }

  double value(std::size_t i, std::size_t j) const {
    assert(!is_missing(i, j) && "reading a missing cell");
    return values_[i * columns_.size() + j];
  }

  void set_value(std::size_t i, std::size_t j, double v);
  void set_missing(std::size_t i, std::size_t j);

  /// Fraction of missing cells in column j.
  double missing_rate(std::size_t j) const;
  std::size_t missing_count(std::size_t j) const;
  bool fully_observed(std::size_t j) const { return missing_count(j) == 0; }
  bool any_missing() const;

  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Index of a column that must exist; throws DataError otherwise.
  std::size_t require_column(std::string_view name) const;

  std::optional<std::size_t> target_index() const;
  std::vector<std::size_t> feature_indices() const;
  std::vector<std::string> feature_names() const;

  /// Row slice over the given columns; missing cells come out as NaN.
  std::vector<double> row(std::size_t i, std::span<const std::size_t> cols) const;
  /// Feature-column slice of row i, NaN marks missing.
  std::vector<double> feature_row(std::size_t i) const;
  /// Observed values of column j, in row order.
  std::vector<double> observed_values(std::size_t j) const;
  /// Target column as a dense vector; throws DataError on a missing target cell.
  std::vector<double> target_values() const;

  Dataset select_columns(std::span<const std::size_t> cols) const;
  Dataset select_rows(std::span<const std::size_t> rows) const;

  /// Checks structural invariants (unique non-empty names, at most one
  /// target). Throws DataError on violation.
  void validate() const;

  bool identical_schema(const Dataset& other) const;

private:
  std::vector<ColumnMeta> columns_;
  std::size_t n_rows_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
};

enum class CellOrigin : std::uint8_t { Observed, Imputed, Indicator };

char origin_code(CellOrigin o);                 // O / I / N
CellOrigin parse_origin(char c);                // throws DataError

/// Per-cell origin tags with the shape of the dataset they describe.
class ProvenanceMask {
public:
  ProvenanceMask() = default;
  ProvenanceMask(std::size_t n_rows, std::size_t n_cols,
                 CellOrigin fill = CellOrigin::Observed);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }

  CellOrigin origin(std::size_t i, std::size_t j) const {
    return cells_[i * n_cols_ + j];
  }
  void set_origin(std::size_t i, std::size_t j, CellOrigin o) {
    cells_[i * n_cols_ + j] = o;
  }

  /// Identifier of the strategy that fabricated the non-observed cells.
  const std::string& strategy() const { return strategy_; }
  void set_strategy(std::string s) { strategy_ = std::move(s); }

  std::vector<CellOrigin> row(std::size_t i) const;
  /// Row slice restricted to the given columns.
  std::vector<CellOrigin> row(std::size_t i, std::span<const std::size_t> cols) const;
  bool any_nonobserved() const;

private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<CellOrigin> cells_;
  std::string strategy_;
};

/// Statistics over the observed cells of one column.
struct ColumnStats {
  double mean = 0;
  double median = 0;
  double truncated_mean = 0;  // two-sided trim by the fraction below
  double stddev = 0;          // sample std, 0 when n_observed < 2
  double min = 0;
  double max = 0;
  std::size_t n_observed = 0;
  double trim = 0;
};

/// Stats over observed cells only; trim in [0, 0.5) drops
/// floor(trim * n_observed) lowest and highest values before averaging.
/// Throws DataError on a fully-missing column.
ColumnStats column_stats(const Dataset& ds, std::size_t col, double trim = 0.1);

/// Drops feature columns whose missing rate exceeds threshold; non-feature
/// columns (target, group label, cohort key) are always retained.
Dataset drop_high_missing(const Dataset& ds, double threshold);

struct TrainTestSplit {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;  // original row indices, ascending
  std::vector<std::size_t> test_rows;
};

/// Disjoint row partition with |test| = round(test_fraction * n_rows),
/// deterministic per seed. Throws DataError when either side would be empty.
TrainTestSplit split_train_test(const Dataset& ds, double test_fraction,
                                std::uint64_t seed);

/// Sum/mean evaluated in value-sorted order so results do not depend on row
/// permutation.
double stable_sum(std::vector<double> values);
double stable_mean(std::vector<double> values);

}  // namespace imprint
