#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dsm {

enum class ErrorCode {
  InvalidArgument,
  EvaluationError,
  NoInstabilityWindow,
  ScanWindowTooSmall,
  NoBifurcation,
  ResonantDenominator,
  NonpositiveSigma0,
  WrongSideOfBranch,
  PositivityLoss,
  BlowUp,
  MaxIterations,
  SingularJacobian,
  SeedFailure,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the toolkit carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dsm
