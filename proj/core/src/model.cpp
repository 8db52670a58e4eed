#include "imprint/model.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "imprint/errors.hpp"
#include "imprint/text.hpp"

namespace imprint {

const char* family_name(ModelFamily family) {
  switch (family) {
    case ModelFamily::Linear: return "linear";
    case ModelFamily::Tree: return "tree";
    case ModelFamily::Boosted: return "boosted";
  }
  return "?";
}

ModelFamily parse_family(const std::string& name) {
  if (name == "linear") return ModelFamily::Linear;
  if (name == "tree") return ModelFamily::Tree;
  if (name == "boosted") return ModelFamily::Boosted;
  throw ConfigError("unknown model family '" + name +
                    "' (expected linear, tree, or boosted)");
}

Model::TreeHolder& Model::TreeHolder::operator=(const TreeHolder& o) {
  if (this != &o) root = o.root ? clone_tree(*o.root) : nullptr;
  return *this;
}

Model::Model(LinearModel m, std::vector<std::string> feature_names, std::string target_name)
    : impl_(std::move(m)),
      feature_names_(std::move(feature_names)),
      target_name_(std::move(target_name)) {
  if (std::get<LinearModel>(impl_).coefficients.size() != feature_names_.size()) {
    throw MismatchError("linear model arity does not match feature name count");
  }
}

Model::Model(std::unique_ptr<TreeNode> root, std::vector<std::string> feature_names,
             std::string target_name)
    : impl_(TreeHolder(std::move(root))),
      feature_names_(std::move(feature_names)),
      target_name_(std::move(target_name)) {}

Model::Model(BoostedModel m, std::vector<std::string> feature_names, std::string target_name)
    : impl_(std::move(m)),
      feature_names_(std::move(feature_names)),
      target_name_(std::move(target_name)) {}

ModelFamily Model::family() const {
  if (std::holds_alternative<LinearModel>(impl_)) return ModelFamily::Linear;
  if (std::holds_alternative<TreeHolder>(impl_)) return ModelFamily::Tree;
  return ModelFamily::Boosted;
}

double Model::predict_row(std::span<const double> row) const {
  if (row.size() != feature_names_.size()) {
    throw MismatchError("predict: row has " + std::to_string(row.size()) +
                        " features, model expects " +
                        std::to_string(feature_names_.size()));
  }
  if (const auto* m = std::get_if<LinearModel>(&impl_)) return predict_linear(*m, row);
  if (const auto* t = std::get_if<TreeHolder>(&impl_)) return predict_tree(*t->root, row);
  return predict_boosted(std::get<BoostedModel>(impl_), row);
}

std::vector<std::size_t> Model::feature_mapping(const Dataset& ds) const {
  std::vector<std::size_t> mapping;
  mapping.reserve(feature_names_.size());
  for (const auto& name : feature_names_) {
    auto idx = ds.find_column(name);
    if (!idx) {
      throw MismatchError("model feature '" + name + "' not present in dataset");
    }
    mapping.push_back(*idx);
  }
  return mapping;
}

std::vector<double> Model::predict(const Dataset& ds) const {
  const auto mapping = feature_mapping(ds);
  std::vector<double> out(ds.n_rows());
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    out[i] = predict_row(ds.row(i, mapping));
  }
  return out;
}

const LinearModel* Model::linear() const { return std::get_if<LinearModel>(&impl_); }

const TreeNode* Model::tree() const {
  const auto* h = std::get_if<TreeHolder>(&impl_);
  return h ? h->root.get() : nullptr;
}

const BoostedModel* Model::boosted() const { return std::get_if<BoostedModel>(&impl_); }

namespace {

void write_node(std::ostream& out, const TreeNode& node) {
  if (node.is_leaf()) {
    out << "node leaf " << format_double(node.value) << ' ' << node.n_rows << '\n';
    return;
  }
  out << "node split " << node.feature << ' ' << format_double(node.threshold) << ' '
      << (node.default_left ? 'L' : 'R') << ' ' << node.n_rows << '\n';
  write_node(out, *node.left);
  write_node(out, *node.right);
}

struct LineReader {
  std::istream& in;
  std::size_t line_no = 0;
  std::string current;  // fields returned by next_fields view into this

  const std::string& next(const std::string& what) {
    if (!std::getline(in, current)) {
      throw DataError("model file: unexpected end of file while reading " + what);
    }
    ++line_no;
    if (!current.empty() && current.back() == '\r') current.pop_back();
    return current;
  }

  std::vector<std::string_view> next_fields(const std::string& what) {
    return split_fields(next(what), ' ');
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw DataError("model file line " + std::to_string(line_no) + ": " + message);
  }
};

std::size_t parse_count(LineReader& reader, std::string_view token) {
  try {
    const double v = parse_double(token);
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      reader.fail("expected a count, got '" + std::string(token) + "'");
    }
    return static_cast<std::size_t>(v);
  } catch (const DataError&) {
    reader.fail("expected a count, got '" + std::string(token) + "'");
  }
}

std::unique_ptr<TreeNode> read_node(LineReader& reader, std::size_t n_features) {
  const auto fields = reader.next_fields("a tree node");
  if (fields.size() < 2 || fields[0] != "node") reader.fail("expected a node record");
  auto node = std::make_unique<TreeNode>();
  if (fields[1] == "leaf") {
    if (fields.size() != 4) reader.fail("leaf record needs value and row count");
    node->value = parse_double(fields[2]);
    node->n_rows = parse_count(reader, fields[3]);
    return node;
  }
  if (fields[1] != "split") {
    reader.fail("unknown node kind '" + std::string(fields[1]) + "'");
  }
  if (fields.size() != 6) {
    reader.fail("split record needs feature, threshold, default side, row count");
  }
  const std::size_t feat = parse_count(reader, fields[2]);
  if (feat >= n_features) reader.fail("split feature index out of range");
  node->feature = static_cast<int>(feat);
  node->threshold = parse_double(fields[3]);
  if (fields[4] == "L") {
    node->default_left = true;
  } else if (fields[4] == "R") {
    node->default_left = false;
  } else {
    reader.fail("default side must be L or R");
  }
  node->n_rows = parse_count(reader, fields[5]);
  node->left = read_node(reader, n_features);
  node->right = read_node(reader, n_features);
  return node;
}

}  // namespace

void Model::save(std::ostream& out) const {
  out << "imprint-model 1\n";
  out << "family " << family_name(family()) << '\n';
  out << "target " << target_name_ << '\n';
  out << "features " << feature_names_.size() << '\n';
  for (const auto& name : feature_names_) out << name << '\n';

  if (const auto* m = std::get_if<LinearModel>(&impl_)) {
    out << "intercept " << format_double(m->intercept) << '\n';
    out << "coefficients " << m->coefficients.size();
    for (double c : m->coefficients) out << ' ' << format_double(c);
    out << '\n';
  } else if (const auto* t = std::get_if<TreeHolder>(&impl_)) {
    write_node(out, *t->root);
  } else {
    const auto& b = std::get<BoostedModel>(impl_);
    out << "base " << format_double(b.base_prediction) << '\n';
    out << "learning_rate " << format_double(b.learning_rate) << '\n';
    out << "train_mse " << b.train_mse.size();
    for (double v : b.train_mse) out << ' ' << format_double(v);
    out << '\n';
    out << "trees " << b.trees.size() << '\n';
    for (const auto& tree : b.trees) write_node(out, *tree);
  }
  out << "end\n";
}

void Model::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  save(out);
  out.flush();
  if (!out) throw DataError("failed writing model to '" + path + "'");
}

Model Model::load(std::istream& in) {
  LineReader reader{in};

  auto header = reader.next_fields("the header");
  if (header.size() != 2 || header[0] != "imprint-model") {
    reader.fail("not a model file (missing 'imprint-model' header)");
  }
  if (header[1] != "1") {
    reader.fail("unsupported model format version " + std::string(header[1]));
  }

  auto family_line = reader.next_fields("the family");
  if (family_line.size() != 2 || family_line[0] != "family") {
    reader.fail("expected 'family <name>'");
  }
  ModelFamily family = ModelFamily::Linear;
  try {
    family = parse_family(std::string(family_line[1]));
  } catch (const ConfigError& e) {
    reader.fail(e.what());
  }

  const std::string target_line = reader.next("the target name");
  if (target_line.rfind("target ", 0) != 0) reader.fail("expected 'target <name>'");
  std::string target = target_line.substr(7);
  if (target.empty()) reader.fail("target name is empty");

  auto count_line = reader.next_fields("the feature count");
  if (count_line.size() != 2 || count_line[0] != "features") {
    reader.fail("expected 'features <count>'");
  }
  const std::size_t n_features = parse_count(reader, count_line[1]);
  if (n_features == 0) reader.fail("model needs at least one feature");
  std::vector<std::string> names;
  names.reserve(n_features);
  for (std::size_t i = 0; i < n_features; ++i) {
    std::string name = reader.next("a feature name");
    if (name.empty()) reader.fail("feature name is empty");
    names.push_back(std::move(name));
  }

  std::optional<Model> model;
  if (family == ModelFamily::Linear) {
    auto icept = reader.next_fields("the intercept");
    if (icept.size() != 2 || icept[0] != "intercept") reader.fail("expected 'intercept <v>'");
    LinearModel m;
    m.intercept = parse_double(icept[1]);
    auto coefs = reader.next_fields("the coefficients");
    if (coefs.size() < 2 || coefs[0] != "coefficients") {
      reader.fail("expected 'coefficients <count> <values>'");
    }
    const std::size_t n = parse_count(reader, coefs[1]);
    if (n != n_features || coefs.size() != 2 + n) {
      reader.fail("coefficient count does not match the feature count");
    }
    for (std::size_t i = 0; i < n; ++i) m.coefficients.push_back(parse_double(coefs[2 + i]));
    model.emplace(std::move(m), std::move(names), std::move(target));
  } else if (family == ModelFamily::Tree) {
    auto root = read_node(reader, n_features);
    model.emplace(std::move(root), std::move(names), std::move(target));
  } else {
    BoostedModel b;
    auto base = reader.next_fields("the base prediction");
    if (base.size() != 2 || base[0] != "base") reader.fail("expected 'base <v>'");
    b.base_prediction = parse_double(base[1]);
    auto lr = reader.next_fields("the learning rate");
    if (lr.size() != 2 || lr[0] != "learning_rate") {
      reader.fail("expected 'learning_rate <v>'");
    }
    b.learning_rate = parse_double(lr[1]);
    auto mse = reader.next_fields("the training loss curve");
    if (mse.size() < 2 || mse[0] != "train_mse") {
      reader.fail("expected 'train_mse <count> <values>'");
    }
    const std::size_t n_mse = parse_count(reader, mse[1]);
    if (mse.size() != 2 + n_mse) reader.fail("training loss count mismatch");
    for (std::size_t i = 0; i < n_mse; ++i) b.train_mse.push_back(parse_double(mse[2 + i]));
    auto trees = reader.next_fields("the tree count");
    if (trees.size() != 2 || trees[0] != "trees") reader.fail("expected 'trees <count>'");
    const std::size_t n_trees = parse_count(reader, trees[1]);
    for (std::size_t i = 0; i < n_trees; ++i) b.trees.push_back(read_node(reader, n_features));
    model.emplace(std::move(b), std::move(names), std::move(target));
  }

  auto tail = reader.next("the end marker");
  if (tail != "end") reader.fail("expected 'end'");
  return std::move(*model);
}

Model Model::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  return load(in);
}

Model fit_model(const Dataset& ds, ModelFamily family, const TrainParams& params) {
  auto names = ds.feature_names();
  const auto target_col = ds.target_index();
  if (!target_col) throw DataError("fit_model: dataset has no target column");
  std::string target = ds.column(*target_col).name;
  switch (family) {
    case ModelFamily::Linear:
      return Model(fit_linear(ds), std::move(names), std::move(target));
    case ModelFamily::Tree:
      return Model(fit_tree(ds, params), std::move(names), std::move(target));
    case ModelFamily::Boosted:
      return Model(fit_boosted(ds, params), std::move(names), std::move(target));
  }
  throw ConfigError("unknown model family");
}

}  // namespace imprint
