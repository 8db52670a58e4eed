#include "imprint/explain.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "imprint/errors.hpp"
#include "imprint/text.hpp"

namespace imprint {

namespace {

constexpr std::size_t kMaxExactFeatures = 16;

void check_row_shape(const Model& model, std::span<const double> row,
                     const OriginRow& provenance) {
  if (row.size() != model.n_features()) {
    throw MismatchError("explain: row has " + std::to_string(row.size()) +
                        " features, model expects " + std::to_string(model.n_features()));
  }
  if (provenance.size() != row.size()) {
    throw MismatchError("explain: provenance row length does not match the feature count");
  }
}

std::vector<Attribution> make_attributions(const Model& model, std::span<const double> row,
                                           std::span<const double> importances) {
  std::vector<Attribution> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) {
    out[i].feature = model.feature_names()[i];
    out[i].feature_index = i;
    out[i].value_used = row[i];
    out[i].importance = importances[i];
  }
  // descending |importance|; stable so ties keep ascending feature index
  std::stable_sort(out.begin(), out.end(), [](const Attribution& a, const Attribution& b) {
    return std::fabs(a.importance) > std::fabs(b.importance);
  });
  return out;
}

}  // namespace

Explanation stamp_provenance(Explanation explanation, const OriginRow& provenance,
                             std::size_t top_k) {
  for (auto& attr : explanation.attributions) {
    if (attr.feature_index >= provenance.size()) {
      throw MismatchError("explain: provenance row shorter than attribution index");
    }
    attr.imputed = provenance[attr.feature_index] != CellOrigin::Observed;
  }
  ImputedWarning warning;
  warning.top_k = top_k;
  const std::size_t lim = std::min(top_k, explanation.attributions.size());
  for (std::size_t i = 0; i < lim; ++i) {
    if (explanation.attributions[i].imputed) {
      warning.features.push_back(explanation.attributions[i].feature);
    }
  }
  if (warning.features.empty()) {
    explanation.warning.reset();
  } else {
    explanation.warning = std::move(warning);
  }
  return explanation;
}

Explanation shapley_exact(const Model& model, std::span<const double> row,
                          std::span<const double> baseline, const OriginRow& provenance,
                          std::size_t top_k) {
  check_row_shape(model, row, provenance);
  if (baseline.size() != row.size()) {
    throw MismatchError("shapley: baseline length does not match the feature count");
  }
  const std::size_t n = row.size();
  if (n > kMaxExactFeatures) {
    throw StrategyError("shapley: " + std::to_string(n) +
                        " features exceeds the exact enumeration limit of " +
                        std::to_string(kMaxExactFeatures));
  }

  // one model call per coalition, memoized by bitmask
  const std::size_t n_masks = std::size_t{1} << n;
  std::vector<double> value(n_masks);
  std::vector<double> blend(row.size());
  for (std::size_t mask = 0; mask < n_masks; ++mask) {
    for (std::size_t i = 0; i < n; ++i) {
      blend[i] = (mask >> i) & 1 ? row[i] : baseline[i];
    }
    value[mask] = model.predict_row(blend);
  }

  std::vector<double> factorial(n + 1, 1.0);
  for (std::size_t i = 1; i <= n; ++i) factorial[i] = factorial[i - 1] * static_cast<double>(i);
  std::vector<double> weight(n);  // by coalition size excluding the player
  for (std::size_t s = 0; s < n; ++s) {
    weight[s] = factorial[s] * factorial[n - 1 - s] / factorial[n];
  }

  std::vector<double> phi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t mask = 0; mask < n_masks; ++mask) {
      if (mask & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(mask));
      phi[i] += weight[size] * (value[mask | bit] - value[mask]);
    }
  }

  Explanation expl;
  expl.baseline_value = value[0];
  expl.model_output = value[n_masks - 1];
  expl.attributions = make_attributions(model, row, phi);
  return stamp_provenance(std::move(expl), provenance, top_k);
}

Explanation lime_local(const Model& model, std::span<const double> row,
                       std::span<const ColumnStats> stats, const LimeParams& params,
                       const OriginRow& provenance, std::size_t top_k) {
  check_row_shape(model, row, provenance);
  if (stats.size() != row.size()) {
    throw MismatchError("lime: need one column statistic per feature");
  }
  if (params.n_samples < 2) throw ConfigError("lime.n_samples must be >= 2");
  if (!(params.perturbation_std_scale > 0)) {
    throw ConfigError("lime.perturbation_std_scale must be > 0");
  }
  const std::size_t n = row.size();
  const double width = params.kernel_width > 0
                           ? params.kernel_width
                           : 0.75 * std::sqrt(static_cast<double>(n));

  std::vector<std::size_t> active;  // features with spread; the rest stay pinned
  for (std::size_t i = 0; i < n; ++i) {
    if (stats[i].stddev > 0) active.push_back(i);
  }
  const std::size_t m = active.size();

  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // rows scaled by sqrt(weight) turn the weighted fit into plain least squares
  Eigen::MatrixXd design(params.n_samples, m + 1);
  Eigen::VectorXd response(params.n_samples);
  std::vector<double> sample(n);
  for (std::size_t s = 0; s < params.n_samples; ++s) {
    double dist_sq = 0;
    std::size_t a = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = gauss(rng);
      if (stats[i].stddev > 0) {
        const double step = params.perturbation_std_scale * g;
        sample[i] = row[i] + step * stats[i].stddev;
        dist_sq += step * step;
        design(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(1 + a)) = step;
        ++a;
      } else {
        sample[i] = row[i];
      }
    }
    const double w = std::exp(-dist_sq / (width * width));
    const double sw = std::sqrt(w);
    design(static_cast<Eigen::Index>(s), 0) = sw;
    for (std::size_t j = 0; j < m; ++j) {
      design(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(1 + j)) *= sw;
    }
    response(static_cast<Eigen::Index>(s)) = sw * model.predict_row(sample);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (static_cast<std::size_t>(qr.rank()) < m + 1) {
    throw DataError("lime: singular weighted design; increase n_samples or the kernel width");
  }
  const Eigen::VectorXd beta = qr.solve(response);

  // design columns are standardized steps, so coefficients are already on the
  // importance scale (coefficient times feature std)
  std::vector<double> importances(n, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    importances[active[j]] = beta(static_cast<Eigen::Index>(1 + j));
  }

  Explanation expl;
  expl.baseline_value = beta(0);  // surrogate value at the explained row
  expl.model_output = model.predict_row(row);
  expl.attributions = make_attributions(model, row, importances);
  return stamp_provenance(std::move(expl), provenance, top_k);
}

namespace {

std::string warning_line(const ImputedWarning& warning) {
  std::string line = "# warning: imputed features in top " + std::to_string(warning.top_k) + ":";
  for (std::size_t i = 0; i < warning.features.size(); ++i) {
    line += i == 0 ? " " : ", ";
    line += warning.features[i];
  }
  return line;
}

}  // namespace

void write_explanation_csv(const Explanation& explanation, std::ostream& out) {
  out << "feature,value,importance,imputed\n";
  for (const auto& attr : explanation.attributions) {
    out << attr.feature << ',' << format_double(attr.value_used) << ','
        << format_double(attr.importance) << ',' << (attr.imputed ? '1' : '0') << '\n';
  }
  if (explanation.warning) out << warning_line(*explanation.warning) << '\n';
}

std::string format_explanation_table(const Explanation& explanation) {
  const std::vector<std::string> header = {"Feature", "Value", "Importance", "Imputed"};
  std::vector<std::array<std::string, 4>> rows;
  rows.reserve(explanation.attributions.size());
  for (const auto& attr : explanation.attributions) {
    rows.push_back({attr.feature, format_double(attr.value_used),
                    format_double(attr.importance), attr.imputed ? "yes" : "no"});
  }

  std::array<std::size_t, 4> width{};
  for (std::size_t c = 0; c < 4; ++c) width[c] = header[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], r[c].size());
  }

  std::ostringstream out;
  auto pad = [&](const std::string& s, std::size_t w) {
    out << s << std::string(w - s.size(), ' ');
  };
  for (std::size_t c = 0; c < 4; ++c) {
    if (c) out << "  ";
    pad(header[c], width[c]);
  }
  out << '\n';
  for (std::size_t c = 0; c < 4; ++c) {
    if (c) out << "  ";
    out << std::string(width[c], '-');
  }
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < 4; ++c) {
      if (c) out << "  ";
      pad(r[c], width[c]);
    }
    out << '\n';
  }
  out << "prediction " << format_double(explanation.model_output) << '\n';
  out << "baseline   " << format_double(explanation.baseline_value) << '\n';
  if (explanation.warning) out << warning_line(*explanation.warning) << '\n';
  return out.str();
}

}  // namespace imprint
