#pragma once

#include <stdexcept>
#include <string>

namespace jcindex {

enum class ErrorCode {
  InvalidArgument,
  ParseError,
  IoError,
  NegativeTime,
  MissingCovariate,
  InconsistentDimension,
  NoEventsOfType,
  EmptyDataset,
  CensoredRecordsPresent,
  DimensionMismatch,
  NoComparablePairs,
  NoSubjectsBeforeHorizon,
  ZeroCensoringSurvival,
  NonConvergence,
  MonotoneLikelihoodDivergence,
  InsufficientEvents,
  BracketingFailure,
  QuadratureNonConvergence,
  FitFailure,
};

// Coarse grouping used for CLI exit codes.
enum class ErrorCategory { usage, data, numerical };

const char* error_name(ErrorCode code) noexcept;
ErrorCategory error_category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const char* name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace jcindex
