#pragma once

#include <string>

#include "imprint/dataset.hpp"

namespace imprint {

/// UTF-8, header row, comma delimited, numeric payloads, no quoting.
/// An empty field or a field equal to missing_token is a missing cell.
struct CsvOptions {
  std::string missing_token;  // empty string means "empty field only"
  char delimiter = ',';
};

/// Loads a CSV file; the named target column gets ColumnRole::Target.
/// Pass an empty target name for a dataset without a modeling target.
/// Throws DataError on unreadable files, duplicate headers, unparseable
/// cells (reported with row and column) or an absent target.
Dataset load_csv(const std::string& path, const std::string& target,
                 const CsvOptions& options = {});

/// Writes values with shortest round-trip formatting; missing cells become
/// the missing token. Reloading reproduces values, mask and column order.
void save_csv(const Dataset& ds, const std::string& path,
              const CsvOptions& options = {});

/// 0/1 matrix with the dataset's header; 1 marks a missing cell.
void save_mask_csv(const Dataset& ds, const std::string& path);

/// Sidecar of identical shape with cells O (observed), I (imputed),
/// N (indicator-derived).
void save_provenance_csv(const ProvenanceMask& mask,
                         const std::vector<ColumnMeta>& columns,
                         const std::string& path);

ProvenanceMask load_provenance_csv(const std::string& path);

/// Reassigns the role of a named column in place.
void assign_role(Dataset& ds, const std::string& name, ColumnRole role);

}  // namespace imprint
