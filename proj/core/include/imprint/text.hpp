#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace imprint {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

/// Strict parse of a full token. Returns false on any trailing garbage.
bool try_parse_double(std::string_view s, double& out);

/// Parsing counterpart of format_double; throws DataError on failure.
double parse_double(std::string_view s);

/// Fixed-point rendering for human-facing tables.
std::string format_fixed(double v, int decimals);

/// Splits one line into fields; keeps empty fields.
std::vector<std::string_view> split_fields(std::string_view line, char delim);

/// Deterministic sub-stream seed from a master seed and a role tag.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

}  // namespace imprint
