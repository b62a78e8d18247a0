#include "jcindex/error.hpp"

namespace jcindex {

const char* error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::MissingCovariate: return "MissingCovariate";
    case ErrorCode::InconsistentDimension: return "InconsistentDimension";
    case ErrorCode::NoEventsOfType: return "NoEventsOfType";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::CensoredRecordsPresent: return "CensoredRecordsPresent";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoComparablePairs: return "NoComparablePairs";
    case ErrorCode::NoSubjectsBeforeHorizon: return "NoSubjectsBeforeHorizon";
    case ErrorCode::ZeroCensoringSurvival: return "ZeroCensoringSurvival";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::MonotoneLikelihoodDivergence: return "MonotoneLikelihoodDivergence";
    case ErrorCode::InsufficientEvents: return "InsufficientEvents";
    case ErrorCode::BracketingFailure: return "BracketingFailure";
    case ErrorCode::QuadratureNonConvergence: return "QuadratureNonConvergence";
    case ErrorCode::FitFailure: return "FitFailure";
  }
  return "Unknown";
}

ErrorCategory error_category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return ErrorCategory::usage;
    case ErrorCode::ParseError:
    case ErrorCode::IoError:
    case ErrorCode::NegativeTime:
    case ErrorCode::MissingCovariate:
    case ErrorCode::InconsistentDimension:
    case ErrorCode::NoEventsOfType:
    case ErrorCode::EmptyDataset:
    case ErrorCode::CensoredRecordsPresent:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NoSubjectsBeforeHorizon:
    case ErrorCode::InsufficientEvents:
      return ErrorCategory::data;
    default:
      return ErrorCategory::numerical;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

}  // namespace jcindex
