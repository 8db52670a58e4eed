#include "imprint/csv.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "imprint/errors.hpp"
#include "imprint/text.hpp"

namespace imprint {

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> read_header(std::istream& in, const std::string& path,
                                     char delimiter) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file, expected a header row");
  line = strip_cr(line);
  std::vector<std::string> names;
  std::unordered_set<std::string> seen;
  for (auto field : split_fields(line, delimiter)) {
    std::string name(field);
    if (name.empty()) throw DataError(path + ": empty column name in header");
    if (!seen.insert(name).second) {
      throw DataError(path + ": duplicate header name '" + name + "'");
    }
    names.push_back(std::move(name));
  }
  return names;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target,
                 const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  auto names = read_header(in, path, options.delimiter);
  std::vector<ColumnMeta> metas;
  metas.reserve(names.size());
  for (auto& name : names) metas.push_back({std::move(name), ColumnRole::Feature, {}});

  // two-pass-free: collect rows first, dimensions known from the header
  std::vector<std::vector<std::pair<bool, double>>> rows;  // (missing, value)
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    // a trailing blank line is an artifact unless rows really have one field
    if (line.empty() && metas.size() > 1 &&
        in.peek() == std::char_traits<char>::eof()) {
      break;
    }
    auto fields = split_fields(line, options.delimiter);
    if (fields.size() != metas.size()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(metas.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    std::vector<std::pair<bool, double>> row(metas.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (fields[j].empty() || fields[j] == options.missing_token) {
        row[j] = {true, 0.0};
        continue;
      }
      double v;
      if (!try_parse_double(fields[j], v) || !std::isfinite(v)) {
        throw DataError(path + ":" + std::to_string(lineno) + ": column '" +
                        metas[j].name + "': cannot parse '" + std::string(fields[j]) +
                        "' as a finite number");
      }
      row[j] = {false, v};
    }
    rows.push_back(std::move(row));
  }

  Dataset ds(std::move(metas), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < ds.n_cols(); ++j) {
      if (!rows[i][j].first) ds.set_value(i, j, rows[i][j].second);
    }
  }
  if (!target.empty()) assign_role(ds, target, ColumnRole::Target);
  ds.validate();
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path, const CsvOptions& options) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (std::size_t j = 0; j < ds.n_cols(); ++j) {
    if (j) out << options.delimiter;
    out << ds.column(j).name;
  }
  out << '\n';
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    for (std::size_t j = 0; j < ds.n_cols(); ++j) {
      if (j) out << options.delimiter;
      if (ds.is_missing(i, j)) {
        out << options.missing_token;
      } else {
        out << format_double(ds.value(i, j));
      }
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

void save_mask_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (std::size_t j = 0; j < ds.n_cols(); ++j) {
    if (j) out << ',';
    out << ds.column(j).name;
  }
  out << '\n';
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    for (std::size_t j = 0; j < ds.n_cols(); ++j) {
      if (j) out << ',';
      out << (ds.is_missing(i, j) ? '1' : '0');
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

void save_provenance_csv(const ProvenanceMask& mask,
                         const std::vector<ColumnMeta>& columns,
                         const std::string& path) {
  if (columns.size() != mask.n_cols()) {
    throw DataError("provenance shape does not match the column list");
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) out << ',';
    out << columns[j].name;
  }
  out << '\n';
  for (std::size_t i = 0; i < mask.n_rows(); ++i) {
    for (std::size_t j = 0; j < mask.n_cols(); ++j) {
      if (j) out << ',';
      out << origin_code(mask.origin(i, j));
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

ProvenanceMask load_provenance_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  auto names = read_header(in, path, ',');

  std::vector<std::vector<CellOrigin>> rows;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() && names.size() > 1 &&
        in.peek() == std::char_traits<char>::eof()) {
      break;
    }
    auto fields = split_fields(line, ',');
    if (fields.size() != names.size()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(names.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    std::vector<CellOrigin> row;
    row.reserve(fields.size());
    for (auto f : fields) {
      if (f.size() != 1) {
        throw DataError(path + ":" + std::to_string(lineno) + ": bad provenance cell '" +
                        std::string(f) + "'");
      }
      row.push_back(parse_origin(f[0]));
    }
    rows.push_back(std::move(row));
  }

  ProvenanceMask mask(rows.size(), names.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < names.size(); ++j) mask.set_origin(i, j, rows[i][j]);
  }
  return mask;
}

void assign_role(Dataset& ds, const std::string& name, ColumnRole role) {
  ds.column(ds.require_column(name)).role = role;
}

}  // namespace imprint
