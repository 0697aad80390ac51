#pragma once

#include <stdexcept>
#include <string>

namespace stretchlab {

enum class ErrorCode {
  InvalidArgument,
  NonHyperbolic,
  CapacityExceeded,
  NotReduced,
  InvarianceBudgetExceeded,
  StepTooSmall,
  NotNegativelyCurved,
  NotConverged,
  EmptyMeasure,
  EmptyWindow,
  NoConvergence,
  PeriodNotFound,
  InvalidModel,
  ConfigInvalid,
  StageFailed,
  SchemaMismatch,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonHyperbolic: return "NonHyperbolic";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::NotReduced: return "NotReduced";
    case ErrorCode::InvarianceBudgetExceeded: return "InvarianceBudgetExceeded";
    case ErrorCode::StepTooSmall: return "StepTooSmall";
    case ErrorCode::NotNegativelyCurved: return "NotNegativelyCurved";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::EmptyMeasure: return "EmptyMeasure";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::PeriodNotFound: return "PeriodNotFound";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::StageFailed: return "StageFailed";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stretchlab
