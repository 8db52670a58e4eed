#include "imprint/tree.hpp"

#include <algorithm>
#include <cmath>

#include "imprint/errors.hpp"

namespace imprint {

void validate(const TrainParams& params) {
  if (params.max_depth < 1) throw ConfigError("train.max_depth must be >= 1");
  if (params.min_leaf_rows < 1) throw ConfigError("train.min_leaf_rows must be >= 1");
  if (params.n_trees < 1) throw ConfigError("train.n_trees must be >= 1");
  if (!(params.learning_rate > 0) || params.learning_rate > 1) {
    throw ConfigError("train.learning_rate must be in (0, 1]");
  }
}

std::unique_ptr<TreeNode> clone_tree(const TreeNode& node) {
  auto out = std::make_unique<TreeNode>();
  out->value = node.value;
  out->n_rows = node.n_rows;
  out->feature = node.feature;
  out->threshold = node.threshold;
  out->default_left = node.default_left;
  if (!node.is_leaf()) {
    out->left = clone_tree(*node.left);
    out->right = clone_tree(*node.right);
  }
  return out;
}

namespace {

// Group sums use the (sum, sumsq, n) algebra: sse = sumsq - sum^2 / n.
// All inputs are accumulated in sorted order so fits are invariant under
// row permutation.
struct GroupSum {
  double sum = 0;
  double sumsq = 0;
  std::size_t n = 0;

  double sse() const {
    if (n == 0) return 0;
    return sumsq - sum * sum / static_cast<double>(n);
  }
};

GroupSum sum_sorted(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  GroupSum g;
  g.n = values.size();
  for (double v : values) {
    g.sum += v;
    g.sumsq += v * v;
  }
  return g;
}

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;  // position within the feature-index list
  double threshold = 0;
  bool default_left = true;
  double gain = 0;
};

struct NodeContext {
  const Dataset* ds;
  std::vector<std::size_t> feats;  // dataset column indices of the features
  std::vector<double> y;           // dense target, row-aligned with the dataset
  const TrainParams* params;
};

SplitChoice find_best_split(const NodeContext& ctx, const std::vector<std::size_t>& rows,
                            double parent_sse) {
  SplitChoice best;
  const std::size_t min_leaf = ctx.params->min_leaf_rows;

  for (std::size_t k = 0; k < ctx.feats.size(); ++k) {
    const std::size_t col = ctx.feats[k];

    std::vector<std::pair<double, double>> obs;  // (feature value, target)
    std::vector<double> missing_targets;
    obs.reserve(rows.size());
    for (std::size_t r : rows) {
      if (ctx.ds->is_missing(r, col)) {
        missing_targets.push_back(ctx.y[r]);
      } else {
        obs.emplace_back(ctx.ds->value(r, col), ctx.y[r]);
      }
    }
    if (obs.size() < 2) continue;
    std::sort(obs.begin(), obs.end());

    GroupSum miss = sum_sorted(std::move(missing_targets));
    GroupSum total;
    total.n = obs.size();
    for (const auto& [x, t] : obs) {
      total.sum += t;
      total.sumsq += t * t;
    }

    GroupSum left;
    for (std::size_t i = 0; i + 1 < obs.size(); ++i) {
      left.sum += obs[i].second;
      left.sumsq += obs[i].second * obs[i].second;
      ++left.n;
      const double a = obs[i].first;
      const double b = obs[i + 1].first;
      if (a == b) continue;
      const double mid = 0.5 * (a + b);
      // adjacent representable values can defeat the strict midpoint
      if (!(a < mid && mid < b)) continue;

      GroupSum right{total.sum - left.sum, total.sumsq - left.sumsq, total.n - left.n};

      // try the missing rows on each side; keep the lower-error assignment
      const GroupSum left_m{left.sum + miss.sum, left.sumsq + miss.sumsq, left.n + miss.n};
      const GroupSum right_m{right.sum + miss.sum, right.sumsq + miss.sumsq,
                             right.n + miss.n};
      const double sse_left_default = left_m.sse() + right.sse();
      const double sse_right_default = left.sse() + right_m.sse();

      const bool go_left = sse_left_default <= sse_right_default;
      const double child_sse = go_left ? sse_left_default : sse_right_default;
      const std::size_t n_left = go_left ? left_m.n : left.n;
      const std::size_t n_right = go_left ? right.n : right_m.n;
      if (n_left < min_leaf || n_right < min_leaf) continue;

      const double gain = parent_sse - child_sse;
      if (gain > best.gain) {
        best.found = true;
        best.feature = k;
        best.threshold = mid;
        best.default_left = go_left;
        best.gain = gain;
      }
    }
  }
  return best;
}

std::unique_ptr<TreeNode> build_node(const NodeContext& ctx,
                                     const std::vector<std::size_t>& rows,
                                     std::size_t depth) {
  auto node = std::make_unique<TreeNode>();
  node->n_rows = rows.size();

  std::vector<double> targets;
  targets.reserve(rows.size());
  for (std::size_t r : rows) targets.push_back(ctx.y[r]);
  node->value = stable_mean(targets);

  const bool pure = std::all_of(targets.begin(), targets.end(),
                                [&](double t) { return t == targets.front(); });
  if (pure || depth >= ctx.params->max_depth ||
      rows.size() < 2 * ctx.params->min_leaf_rows) {
    return node;
  }

  const GroupSum parent = sum_sorted(std::move(targets));
  const SplitChoice split = find_best_split(ctx, rows, parent.sse());
  if (!split.found || !(split.gain > 0)) return node;

  node->feature = static_cast<int>(split.feature);
  node->threshold = split.threshold;
  node->default_left = split.default_left;

  std::vector<std::size_t> left_rows, right_rows;
  const std::size_t col = ctx.feats[split.feature];
  for (std::size_t r : rows) {
    bool left;
    if (ctx.ds->is_missing(r, col)) {
      left = split.default_left;
    } else {
      left = ctx.ds->value(r, col) < split.threshold;
    }
    (left ? left_rows : right_rows).push_back(r);
  }
  node->left = build_node(ctx, left_rows, depth + 1);
  node->right = build_node(ctx, right_rows, depth + 1);
  return node;
}

}  // namespace

std::unique_ptr<TreeNode> fit_tree(const Dataset& ds, const TrainParams& params) {
  validate(params);
  if (ds.n_rows() < params.min_leaf_rows) {
    throw DataError("fit_tree: need at least min_leaf_rows rows");
  }
  NodeContext ctx;
  ctx.ds = &ds;
  ctx.feats = ds.feature_indices();
  if (ctx.feats.empty()) throw DataError("fit_tree: no feature columns");
  ctx.y = ds.target_values();
  ctx.params = &params;

  std::vector<std::size_t> rows(ds.n_rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return build_node(ctx, rows, 0);
}

double predict_tree(const TreeNode& root, std::span<const double> row) {
  const TreeNode* node = &root;
  while (!node->is_leaf()) {
    const auto j = static_cast<std::size_t>(node->feature);
    if (j >= row.size()) {
      throw MismatchError("predict_tree: row has " + std::to_string(row.size()) +
                          " features, split wants index " + std::to_string(j));
    }
    const double v = row[j];
    bool left;
    if (std::isnan(v)) {
      left = node->default_left;
    } else {
      left = v < node->threshold;
    }
    node = left ? node->left.get() : node->right.get();
  }
  return node->value;
}

}  // namespace imprint
