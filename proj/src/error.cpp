#include "sweep/error.hpp"

namespace sweep {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInfeasiblePoint: return "InfeasiblePoint";
    case ErrorCode::kQpFailure: return "QpFailure";
    case ErrorCode::kIterationCap: return "IterationCap";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kFitResidualTooLarge: return "FitResidualTooLarge";
    case ErrorCode::kLevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::kMissingReference: return "MissingReference";
    case ErrorCode::kNoDescent: return "NoDescent";
    case ErrorCode::kSearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::kLicqViolated: return "LicqViolated";
    case ErrorCode::kRecoveryDiverged: return "RecoveryDiverged";
    case ErrorCode::kNotConverging: return "NotConverging";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMissingSection: return "MissingSection";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace sweep
