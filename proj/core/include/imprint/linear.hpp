#pragma once

#include <span>
#include <vector>

#include "imprint/dataset.hpp"

namespace imprint {

struct LinearModel {
  double intercept = 0;
  std::vector<double> coefficients;  // one per feature column
};

/// Ordinary least squares on the feature columns against the target.
/// Requires fully observed features; throws DataError on missing cells or a
/// rank-deficient design matrix (no silent regularization).
LinearModel fit_linear(const Dataset& ds);

/// Throws DataError on a NaN (missing) cell, MismatchError on arity mismatch.
double predict_linear(const LinearModel& model, std::span<const double> row);

}  // namespace imprint
