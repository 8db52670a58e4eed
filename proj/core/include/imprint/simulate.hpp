#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "imprint/dataset.hpp"

namespace imprint {

/// 0/1 population label attached to synthetic data for fairness experiments.
/// Rows with label 1 get the target shift and the per-feature shifts added,
/// so both outcome and covariate distributions can differ by group.
struct GroupSpec {
  double fraction = 0.5;               // P(label == 1)
  double target_shift = 0.0;
  std::vector<double> feature_shifts;  // empty or one entry per feature
};

/// Linear data-generating process: iid (optionally factor-correlated)
/// standard normal features, target = coefficients . x + noise.
struct SynthSpec {
  std::size_t n_rows = 0;
  std::vector<double> coefficients;
  double noise_std = 0.0;
  /// Pairwise feature correlation in [0, 1) realized through one shared
  /// latent factor: x_j = sqrt(c) * z + sqrt(1 - c) * e_j.
  double feature_correlation = 0.0;
  std::optional<GroupSpec> group;
  std::uint64_t seed = 0;
  std::string target_name = "y";
  std::string feature_prefix = "x";
  std::string group_name = "group";
};

/// Fully observed dataset, deterministic per seed.
Dataset synth_generate(const SynthSpec& spec);

struct McarSpec {
  double rate = 0.0;  // independent per-cell removal probability
};

struct MarSpec {
  std::string driver;  // fully observed column, not itself masked
  double threshold = 0.0;
  double rate_below = 0.0;  // removal probability when driver <= threshold
  double rate_above = 0.0;  // removal probability when driver >  threshold
};

struct NmarSpec {
  double self_threshold = 0.0;
  double rate_low = 0.0;   // removal probability when the cell's own value <= threshold
  double rate_high = 0.0;  // removal probability when the cell's own value >  threshold
};

struct MissingnessSpec {
  std::variant<McarSpec, MarSpec, NmarSpec> mechanism;
  std::vector<std::string> columns;  // columns to mask
};

const char* mechanism_name(const MissingnessSpec& spec);

struct MaskedData {
  Dataset masked;
  Dataset ground_truth;  // untouched copy of the input
};

/// Masks the named columns under the spec's mechanism, deterministic per
/// seed. Cell decisions consume one uniform draw per (column, row) in
/// ascending column-index then row order, so an NMAR decision depends only
/// on the cell's own value. Throws DataError when a masked column or the
/// MAR driver already has missing cells.
MaskedData apply_missingness(const Dataset& ds, const MissingnessSpec& spec,
                             std::uint64_t seed);

/// Expected overall masking rate of the spec on this data (used to build
/// rate-matched MCAR counterparts for paired experiments).
double expected_missing_rate(const Dataset& ds, const MissingnessSpec& spec);

void validate(const SynthSpec& spec);
void validate(const MissingnessSpec& spec);

}  // namespace imprint
