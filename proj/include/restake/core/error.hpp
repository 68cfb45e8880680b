#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace restake {

/// Base of every engine error; the CLI maps these to exit code 1 and the
/// service to ApiError::EngineError unless a subclass says otherwise.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition or invariant on caller-supplied input was violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A ratio whose denominator is zero.
class UndefinedRatioError : public Error {
 public:
  using Error::Error;
};

/// Malformed document, CSV or remote payload.
class DataError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class SingularDesignError : public Error {
 public:
  SingularDesignError(const std::string& what, std::vector<std::string> columns)
      : Error(what), columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::string> columns_;
};

class NetworkError : public Error {
 public:
  using Error::Error;
};

class CacheMissError : public Error {
 public:
  using Error::Error;
};

}  // namespace restake
