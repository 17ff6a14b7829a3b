#pragma once

#include <stdexcept>
#include <string>

namespace fide {

enum class ErrorCode {
  ParseError,
  InvalidProblem,
  NotRegular,
  NotWellPosed,
  ContractionFailed,
  NoConvergence,
  NoUniqueSolution,
};

const char* to_string(ErrorCode code);

/// Failure of a solver stage, tagged with a machine-readable code so batch
/// drivers can map it to an exit status or a report entry.
class SolveError : public std::runtime_error {
 public:
  SolveError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::InvalidProblem: return "INVALID_PROBLEM";
    case ErrorCode::NotRegular: return "NOT_REGULAR";
    case ErrorCode::NotWellPosed: return "NOT_WELL_POSED";
    case ErrorCode::ContractionFailed: return "CONTRACTION_FAILED";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::NoUniqueSolution: return "NO_UNIQUE_SOLUTION";
  }
  return "UNKNOWN";
}

}  // namespace fide
