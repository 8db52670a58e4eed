#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "imprint/dataset.hpp"

namespace testutil {

constexpr double kNA = std::numeric_limits<double>::quiet_NaN();

/// Builds a dataset from row-major cells; NaN marks a missing cell.
inline imprint::Dataset make_table(std::vector<imprint::ColumnMeta> columns,
                                   const std::vector<std::vector<double>>& rows) {
  imprint::Dataset ds(std::move(columns), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (!std::isnan(rows[i][j])) ds.set_value(i, j, rows[i][j]);
    }
  }
  return ds;
}

inline imprint::ColumnMeta feature(std::string name) {
  return {std::move(name), imprint::ColumnRole::Feature, {}};
}

inline imprint::ColumnMeta target(std::string name) {
  return {std::move(name), imprint::ColumnRole::Target, {}};
}

/// Random feature/target dataset; each feature cell goes missing with
/// probability miss_rate. Targets stay observed.
inline imprint::Dataset random_table(std::mt19937_64& rng, std::size_t n_rows,
                                     std::size_t n_features, double miss_rate) {
  std::vector<imprint::ColumnMeta> metas;
  for (std::size_t j = 0; j < n_features; ++j) {
    metas.push_back(feature("f" + std::to_string(j)));
  }
  metas.push_back(target("y"));
  imprint::Dataset ds(std::move(metas), n_rows);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t j = 0; j < n_features; ++j) {
      if (unif(rng) >= miss_rate) ds.set_value(i, j, gauss(rng));
    }
    ds.set_value(i, n_features, gauss(rng));
  }
  return ds;
}

inline bool same_cells(const imprint::Dataset& a, const imprint::Dataset& b) {
  if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols()) return false;
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    for (std::size_t j = 0; j < a.n_cols(); ++j) {
      if (a.is_missing(i, j) != b.is_missing(i, j)) return false;
      if (!a.is_missing(i, j) && a.value(i, j) != b.value(i, j)) return false;
    }
  }
  return true;
}

}  // namespace testutil
