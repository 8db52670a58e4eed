#pragma once

#include <stdexcept>
#include <string>

namespace imprint {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// Invalid configuration: unknown keys, bad values, malformed documents.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Unreadable, malformed or contract-violating input data.
class DataError : public Error {
public:
  using Error::Error;
};

/// An imputation strategy could not be applied to the given data.
class StrategyError : public Error {
public:
  using Error::Error;
};

/// A model or imputer was applied to data it was not fitted for.
class MismatchError : public Error {
public:
  using Error::Error;
};

}  // namespace imprint
