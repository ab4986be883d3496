#pragma once

#include <stdexcept>
#include <string>

namespace subharmonic {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
  kSuccess = 0,
  kValidation = 2,
  kIntegration = 3,
  kFitOrCertification = 4,
};

class Error : public std::runtime_error {
 public:
  Error(const std::string& what, ExitCode code) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Bad parameters, bad config, incompatible truncation, basis mismatch.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what, ExitCode::kValidation) {}
};

/// Product space too large to address.
class SizingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Coherent-state truncation leaves too much weight in the tail.
class TruncationError : public ValidationError {
 public:
  TruncationError(const std::string& what, double tail_weight)
      : ValidationError(what), tail_weight_(tail_weight) {}
  double tail_weight() const noexcept { return tail_weight_; }

 private:
  double tail_weight_;
};

/// Norm drift beyond the configured bound.
class IntegrationError : public Error {
 public:
  explicit IntegrationError(const std::string& what) : Error(what, ExitCode::kIntegration) {}
};

/// No exponential window could be resolved, or a truncation could not be certified.
class FitError : public Error {
 public:
  explicit FitError(const std::string& what) : Error(what, ExitCode::kFitOrCertification) {}
};

}  // namespace subharmonic
