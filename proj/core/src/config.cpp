#include "imprint/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "imprint/errors.hpp"

namespace imprint {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError("config: " + path + " " + message);
}

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    const std::string& key = item.key();
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("config: unknown key '" + join_path(path, key) + "'");
    }
  }
}

const json* find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
  const json* v = find(obj, key);
  if (!v) fail(join_path(path, key), "is required");
  return *v;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "must be a number");
  return v.get<double>();
}

std::uint64_t as_uint(const json& v, const std::string& path) {
  if (!v.is_number_unsigned()) fail(path, "must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::size_t as_count(const json& v, const std::string& path) {
  return static_cast<std::size_t>(as_uint(v, path));
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "must be a string");
  return v.get<std::string>();
}

const json& as_object(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "must be an object");
  return v;
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "must be an array");
  return v;
}

std::vector<double> as_number_array(const json& v, const std::string& path) {
  std::vector<double> out;
  for (const auto& e : as_array(v, path)) out.push_back(as_number(e, path + " entries"));
  return out;
}

std::vector<std::string> as_string_array(const json& v, const std::string& path) {
  std::vector<std::string> out;
  for (const auto& e : as_array(v, path)) out.push_back(as_string(e, path + " entries"));
  return out;
}

GroupSpec parse_group(const json& v, const std::string& path) {
  const json& obj = as_object(v, path);
  check_keys(obj, path, {"fraction", "target_shift", "feature_shifts"});
  GroupSpec group;
  if (const json* f = find(obj, "fraction")) {
    group.fraction = as_number(*f, join_path(path, "fraction"));
  }
  if (const json* s = find(obj, "target_shift")) {
    group.target_shift = as_number(*s, join_path(path, "target_shift"));
  }
  if (const json* fs = find(obj, "feature_shifts")) {
    group.feature_shifts = as_number_array(*fs, join_path(path, "feature_shifts"));
  }
  return group;
}

SynthSpec parse_synth(const json& v, const std::string& path) {
  const json& obj = as_object(v, path);
  check_keys(obj, path,
             {"n_rows", "coefficients", "noise_std", "feature_correlation", "group",
              "seed", "target_name", "feature_prefix", "group_name"});
  SynthSpec spec;
  spec.n_rows = as_count(require(obj, path, "n_rows"), join_path(path, "n_rows"));
  spec.coefficients =
      as_number_array(require(obj, path, "coefficients"), join_path(path, "coefficients"));
  if (const json* n = find(obj, "noise_std")) {
    spec.noise_std = as_number(*n, join_path(path, "noise_std"));
  }
  if (const json* c = find(obj, "feature_correlation")) {
    spec.feature_correlation = as_number(*c, join_path(path, "feature_correlation"));
  }
  if (const json* g = find(obj, "group")) spec.group = parse_group(*g, join_path(path, "group"));
  if (const json* s = find(obj, "seed")) spec.seed = as_uint(*s, join_path(path, "seed"));
  if (const json* t = find(obj, "target_name")) {
    spec.target_name = as_string(*t, join_path(path, "target_name"));
  }
  if (const json* p = find(obj, "feature_prefix")) {
    spec.feature_prefix = as_string(*p, join_path(path, "feature_prefix"));
  }
  if (const json* g = find(obj, "group_name")) {
    spec.group_name = as_string(*g, join_path(path, "group_name"));
  }
  return spec;
}

CsvSource parse_csv_source(const json& v, const std::string& path) {
  const json& obj = as_object(v, path);
  check_keys(obj, path, {"path", "target", "missing_token", "group", "cohort"});
  CsvSource src;
  src.path = as_string(require(obj, path, "path"), join_path(path, "path"));
  src.target = as_string(require(obj, path, "target"), join_path(path, "target"));
  if (const json* m = find(obj, "missing_token")) {
    src.missing_token = as_string(*m, join_path(path, "missing_token"));
  }
  if (const json* g = find(obj, "group")) src.group = as_string(*g, join_path(path, "group"));
  if (const json* c = find(obj, "cohort")) src.cohort = as_string(*c, join_path(path, "cohort"));
  return src;
}

MissingnessSpec parse_missingness(const json& v, const std::string& path) {
  const json& obj = as_object(v, path);
  check_keys(obj, path,
             {"mechanism", "columns", "rate", "driver", "threshold", "rate_below",
              "rate_above", "self_threshold", "rate_low", "rate_high"});
  MissingnessSpec spec;
  const std::string mech =
      as_string(require(obj, path, "mechanism"), join_path(path, "mechanism"));
  spec.columns = as_string_array(require(obj, path, "columns"), join_path(path, "columns"));

  auto reject = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      if (find(obj, k)) {
        fail(join_path(path, k), "does not apply to mechanism '" + mech + "'");
      }
    }
  };

  if (mech == "mcar") {
    reject({"driver", "threshold", "rate_below", "rate_above", "self_threshold",
            "rate_low", "rate_high"});
    McarSpec m;
    m.rate = as_number(require(obj, path, "rate"), join_path(path, "rate"));
    spec.mechanism = m;
  } else if (mech == "mar") {
    reject({"rate", "self_threshold", "rate_low", "rate_high"});
    MarSpec m;
    m.driver = as_string(require(obj, path, "driver"), join_path(path, "driver"));
    if (const json* t = find(obj, "threshold")) {
      m.threshold = as_number(*t, join_path(path, "threshold"));
    }
    m.rate_below = as_number(require(obj, path, "rate_below"), join_path(path, "rate_below"));
    m.rate_above = as_number(require(obj, path, "rate_above"), join_path(path, "rate_above"));
    spec.mechanism = m;
  } else if (mech == "nmar") {
    reject({"rate", "driver", "threshold", "rate_below", "rate_above"});
    NmarSpec m;
    if (const json* t = find(obj, "self_threshold")) {
      m.self_threshold = as_number(*t, join_path(path, "self_threshold"));
    }
    m.rate_low = as_number(require(obj, path, "rate_low"), join_path(path, "rate_low"));
    m.rate_high = as_number(require(obj, path, "rate_high"), join_path(path, "rate_high"));
    spec.mechanism = m;
  } else {
    fail(join_path(path, "mechanism"),
         "must be 'mcar', 'mar' or 'nmar', got '" + mech + "'");
  }
  return spec;
}

CentralMeasure parse_measure_at(const std::string& name, const std::string& path) {
  try {
    return parse_measure(name);
  } catch (const ConfigError&) {
    fail(path, "must be 'mean', 'median' or 'truncated-mean', got '" + name + "'");
  }
}

ImputationStrategy parse_strategy(const json& v, const std::string& path) {
  if (v.is_string()) {
    const std::string name = v.get<std::string>();
    if (name == "complete-case") return CompleteCaseStrategy{};
    if (name == "indicator") return IndicatorStrategy{};
    if (name == "mice") return MiceStrategy{};
    if (name.rfind("central-", 0) == 0) {
      CentralStrategy c;
      c.measure = parse_measure_at(name.substr(8), path);
      return c;
    }
    fail(path, "names an unknown strategy '" + name + "'");
  }
  const json& obj = as_object(v, path);
  const std::string kind = as_string(require(obj, path, "kind"), join_path(path, "kind"));
  if (kind == "complete-case") {
    check_keys(obj, path, {"kind"});
    return CompleteCaseStrategy{};
  }
  if (kind == "indicator") {
    check_keys(obj, path, {"kind", "columns"});
    IndicatorStrategy s;
    if (const json* c = find(obj, "columns")) {
      s.columns = as_string_array(*c, join_path(path, "columns"));
    }
    return s;
  }
  if (kind == "central") {
    check_keys(obj, path, {"kind", "measure", "cohort", "trim"});
    CentralStrategy s;
    if (const json* m = find(obj, "measure")) {
      s.measure = parse_measure_at(as_string(*m, join_path(path, "measure")),
                                   join_path(path, "measure"));
    }
    if (const json* c = find(obj, "cohort")) {
      s.cohort_key = as_string(*c, join_path(path, "cohort"));
    }
    if (const json* t = find(obj, "trim")) s.trim = as_number(*t, join_path(path, "trim"));
    return s;
  }
  if (kind == "mice") {
    check_keys(obj, path, {"kind", "max_iter", "tol"});
    MiceStrategy s;
    if (const json* m = find(obj, "max_iter")) {
      s.max_iter = as_count(*m, join_path(path, "max_iter"));
    }
    if (const json* t = find(obj, "tol")) s.tol = as_number(*t, join_path(path, "tol"));
    return s;
  }
  fail(join_path(path, "kind"), "names an unknown strategy kind '" + kind + "'");
}

ModelFamily parse_family_at(const json& v, const std::string& path) {
  const std::string name = as_string(v, path);
  try {
    return parse_family(name);
  } catch (const ConfigError&) {
    fail(path, "must be 'linear', 'tree' or 'boosted', got '" + name + "'");
  }
}

TrainParams parse_train(const json& v, const std::string& path) {
  const json& obj = as_object(v, path);
  check_keys(obj, path, {"max_depth", "min_leaf_rows", "n_trees", "learning_rate"});
  TrainParams params;
  if (const json* d = find(obj, "max_depth")) {
    params.max_depth = as_count(*d, join_path(path, "max_depth"));
  }
  if (const json* m = find(obj, "min_leaf_rows")) {
    params.min_leaf_rows = as_count(*m, join_path(path, "min_leaf_rows"));
  }
  if (const json* n = find(obj, "n_trees")) {
    params.n_trees = as_count(*n, join_path(path, "n_trees"));
  }
  if (const json* l = find(obj, "learning_rate")) {
    params.learning_rate = as_number(*l, join_path(path, "learning_rate"));
  }
  return params;
}

LimeParams parse_lime(const json& v, const std::string& path) {
  const json& obj = as_object(v, path);
  check_keys(obj, path, {"n_samples", "kernel_width", "perturbation_std_scale", "seed"});
  LimeParams params;
  if (const json* n = find(obj, "n_samples")) {
    params.n_samples = as_count(*n, join_path(path, "n_samples"));
  }
  if (const json* k = find(obj, "kernel_width")) {
    params.kernel_width = as_number(*k, join_path(path, "kernel_width"));
  }
  if (const json* p = find(obj, "perturbation_std_scale")) {
    params.perturbation_std_scale = as_number(*p, join_path(path, "perturbation_std_scale"));
  }
  if (const json* s = find(obj, "seed")) params.seed = as_uint(*s, join_path(path, "seed"));
  return params;
}

DriftSection parse_drift(const json& v, const std::string& path) {
  const json& obj = as_object(v, path);
  check_keys(obj, path, {"strategy", "model", "n_explain_rows"});
  DriftSection section;
  if (const json* s = find(obj, "strategy")) {
    section.strategy = parse_strategy(*s, join_path(path, "strategy"));
  }
  if (const json* m = find(obj, "model")) {
    section.model = parse_family_at(*m, join_path(path, "model"));
  }
  if (const json* n = find(obj, "n_explain_rows")) {
    section.n_explain_rows = as_count(*n, join_path(path, "n_explain_rows"));
  }
  return section;
}

FairnessSection parse_fairness(const json& v, const std::string& path) {
  const json& obj = as_object(v, path);
  check_keys(obj, path, {"strategy", "model"});
  FairnessSection section;
  if (const json* s = find(obj, "strategy")) {
    section.strategy = parse_strategy(*s, join_path(path, "strategy"));
  }
  if (const json* m = find(obj, "model")) {
    section.model = parse_family_at(*m, join_path(path, "model"));
  }
  return section;
}

ShiftSection parse_shift(const json& v, const std::string& path) {
  const json& obj = as_object(v, path);
  check_keys(obj, path, {"factor", "model"});
  ShiftSection section;
  if (const json* f = find(obj, "factor")) {
    section.factor = as_number(*f, join_path(path, "factor"));
  }
  if (const json* m = find(obj, "model")) {
    section.model = parse_family_at(*m, join_path(path, "model"));
  }
  return section;
}

std::size_t line_of_offset(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: parse error at line " +
                      std::to_string(line_of_offset(json_text, e.byte)) + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(doc, "",
             {"schema_version", "seed", "data", "missingness", "test_fraction",
              "drop_missing_above", "strategies", "models", "train", "explainer", "lime",
              "top_k", "drift", "fairness", "shift", "row_index", "strategy", "model",
              "out_dir"});

  ExperimentConfig config;
  if (const json* v = find(doc, "schema_version")) {
    config.schema_version = static_cast<int>(as_uint(*v, "schema_version"));
  }
  if (const json* v = find(doc, "seed")) config.seed = as_uint(*v, "seed");

  const json& data = as_object(require(doc, "", "data"), "data");
  check_keys(data, "data", {"synth", "csv"});
  if (const json* v = find(data, "synth")) config.synth = parse_synth(*v, "data.synth");
  if (const json* v = find(data, "csv")) config.csv = parse_csv_source(*v, "data.csv");

  if (const json* v = find(doc, "missingness")) {
    config.missingness = parse_missingness(*v, "missingness");
  }
  if (const json* v = find(doc, "test_fraction")) {
    config.test_fraction = as_number(*v, "test_fraction");
  }
  // explicit null disables the drop rule
  if (auto it = doc.find("drop_missing_above"); it != doc.end()) {
    if (it->is_null()) {
      config.drop_missing_above.reset();
    } else {
      config.drop_missing_above = as_number(*it, "drop_missing_above");
    }
  }
  if (const json* v = find(doc, "strategies")) {
    const json& arr = as_array(*v, "strategies");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      config.strategies.push_back(
          parse_strategy(arr[i], "strategies[" + std::to_string(i) + "]"));
    }
  }
  if (const json* v = find(doc, "models")) {
    const json& arr = as_array(*v, "models");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      config.models.push_back(parse_family_at(arr[i], "models[" + std::to_string(i) + "]"));
    }
  }
  if (const json* v = find(doc, "train")) config.train = parse_train(*v, "train");
  if (const json* v = find(doc, "explainer")) {
    const std::string name = as_string(*v, "explainer");
    if (name == "shapley") {
      config.explainer = ExplainerKind::Shapley;
    } else if (name == "lime") {
      config.explainer = ExplainerKind::Lime;
    } else {
      fail("explainer", "must be 'shapley' or 'lime', got '" + name + "'");
    }
  }
  if (const json* v = find(doc, "lime")) config.lime = parse_lime(*v, "lime");
  if (const json* v = find(doc, "top_k")) config.top_k = as_count(*v, "top_k");
  if (const json* v = find(doc, "drift")) config.drift = parse_drift(*v, "drift");
  if (const json* v = find(doc, "fairness")) {
    config.fairness = parse_fairness(*v, "fairness");
  }
  if (const json* v = find(doc, "shift")) config.shift = parse_shift(*v, "shift");
  if (const json* v = find(doc, "row_index")) {
    config.row_index = as_count(*v, "row_index");
  }
  if (const json* v = find(doc, "strategy")) {
    config.strategy = parse_strategy(*v, "strategy");
  }
  if (const json* v = find(doc, "model")) config.model = parse_family_at(*v, "model");
  if (const json* v = find(doc, "out_dir")) config.out_dir = as_string(*v, "out_dir");

  validate(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void validate(const ExperimentConfig& config) {
  if (config.schema_version != 1) {
    throw ConfigError("config: schema_version must be 1, got " +
                      std::to_string(config.schema_version));
  }
  if (config.synth.has_value() == config.csv.has_value()) {
    throw ConfigError("config: data needs exactly one of 'synth' or 'csv'");
  }
  if (config.synth) validate(*config.synth);
  if (config.csv) {
    if (config.csv->path.empty()) throw ConfigError("config: data.csv.path is empty");
    if (config.csv->target.empty()) throw ConfigError("config: data.csv.target is empty");
  }
  if (config.missingness) validate(*config.missingness);
  if (!(config.test_fraction > 0) || !(config.test_fraction < 1)) {
    throw ConfigError("config: test_fraction must be in (0, 1)");
  }
  if (config.drop_missing_above &&
      (!(*config.drop_missing_above > 0) || *config.drop_missing_above > 1)) {
    throw ConfigError("config: drop_missing_above must be in (0, 1]");
  }
  validate(config.train);
  if (config.top_k < 1) throw ConfigError("config: top_k must be >= 1");
  if (config.lime.n_samples < 2) throw ConfigError("config: lime.n_samples must be >= 2");
  if (config.lime.kernel_width < 0) {
    throw ConfigError("config: lime.kernel_width must be >= 0 (0 means the default)");
  }
  if (!(config.lime.perturbation_std_scale > 0)) {
    throw ConfigError("config: lime.perturbation_std_scale must be > 0");
  }
  if (config.drift && config.drift->n_explain_rows < 1) {
    throw ConfigError("config: drift.n_explain_rows must be >= 1");
  }
  if (config.shift && !(config.shift->factor > 0)) {
    throw ConfigError("config: shift.factor must be > 0");
  }
  for (const auto& strategy : config.strategies) {
    if (const auto* c = std::get_if<CentralStrategy>(&strategy)) {
      if (c->trim < 0 || c->trim >= 0.5) {
        throw ConfigError("config: strategies central trim must be in [0, 0.5)");
      }
    }
  }
}

}  // namespace imprint
