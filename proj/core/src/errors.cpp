#include "dsm/errors.hpp"

namespace dsm {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::EvaluationError: return "evaluation-error";
    case ErrorCode::NoInstabilityWindow: return "no-instability-window";
    case ErrorCode::ScanWindowTooSmall: return "scan-window-too-small";
    case ErrorCode::NoBifurcation: return "no-positive-sigma";
    case ErrorCode::ResonantDenominator: return "resonant-denominator";
    case ErrorCode::NonpositiveSigma0: return "nonpositive-sigma0";
    case ErrorCode::WrongSideOfBranch: return "wrong-side-of-branch";
    case ErrorCode::PositivityLoss: return "positivity-loss";
    case ErrorCode::BlowUp: return "blow-up";
    case ErrorCode::MaxIterations: return "max-iterations";
    case ErrorCode::SingularJacobian: return "singular-jacobian";
    case ErrorCode::SeedFailure: return "seed-failure";
    case ErrorCode::ConfigError: return "config-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace dsm
