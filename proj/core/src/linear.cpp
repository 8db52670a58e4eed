#include "imprint/linear.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "imprint/errors.hpp"

namespace imprint {

LinearModel fit_linear(const Dataset& ds) {
  const auto feats = ds.feature_indices();
  if (feats.empty()) throw DataError("fit_linear: no feature columns");
  const auto y = ds.target_values();
  const std::size_t n = ds.n_rows();
  const std::size_t p = feats.size() + 1;

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : feats) {
      if (ds.is_missing(i, j)) {
        throw DataError("fit_linear: missing feature cell at row " + std::to_string(i) +
                        ", column '" + ds.column(j).name + "' (impute first)");
      }
    }
  }

  Eigen::MatrixXd a(n, p);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (std::size_t k = 0; k < feats.size(); ++k) a(i, k + 1) = ds.value(i, feats[k]);
    b(i) = y[i];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < static_cast<Eigen::Index>(p)) {
    throw DataError("fit_linear: rank-deficient design matrix (rank " +
                    std::to_string(qr.rank()) + " of " + std::to_string(p) +
                    " columns); remove collinear or constant features");
  }
  Eigen::VectorXd beta = qr.solve(b);

  LinearModel model;
  model.intercept = beta(0);
  model.coefficients.assign(beta.data() + 1, beta.data() + p);
  return model;
}

double predict_linear(const LinearModel& model, std::span<const double> row) {
  if (row.size() != model.coefficients.size()) {
    throw MismatchError("predict_linear: expected " +
                        std::to_string(model.coefficients.size()) + " features, got " +
                        std::to_string(row.size()));
  }
  double out = model.intercept;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (std::isnan(row[j])) {
      throw DataError("predict_linear: missing value at feature " + std::to_string(j) +
                      "; the linear family needs fully observed rows");
    }
    out += model.coefficients[j] * row[j];
  }
  return out;
}

}  // namespace imprint
