#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace sweep {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ErrorCode {
  kInvalidArgument,
  kInfeasiblePoint,
  kQpFailure,
  kIterationCap,
  kInfeasible,
  kFitResidualTooLarge,
  kLevelOutOfRange,
  kMissingReference,
  kNoDescent,
  kSearchSpaceTooLarge,
  kLicqViolated,
  kRecoveryDiverged,
  kNotConverging,
  kParseError,
  kMissingSection,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix, for rethrowing with added context.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace sweep
