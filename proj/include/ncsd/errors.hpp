#pragma once

#include <stdexcept>
#include <string>

namespace ncsd {

/// A caller broke an operation's precondition (dimension mismatch, negative
/// radius, invalid schedule constants, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An iterative routine did not reach its tolerance. Subclasses carry the best
/// partial result so callers can decide whether to proceed.
class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Input data failed validation. `path` is a JSON pointer when the input came
/// from a problem file, otherwise the offending field name.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Malformed problem document (syntax or schema).
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace ncsd
