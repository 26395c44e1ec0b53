#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace conoflow {

enum class ErrorCode {
  Config,
  UnsupportedRegularity,
  SingularPoint,
  NearGlancing,
  Precondition,
  NumericalInstability,
  Diagnostic,
  HypothesisViolation,
  Parse,
  Usage,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config: return "config";
    case ErrorCode::UnsupportedRegularity: return "unsupported-regularity";
    case ErrorCode::SingularPoint: return "singular-point";
    case ErrorCode::NearGlancing: return "near-glancing";
    case ErrorCode::Precondition: return "precondition";
    case ErrorCode::NumericalInstability: return "numerical-instability";
    case ErrorCode::Diagnostic: return "diagnostic";
    case ErrorCode::HypothesisViolation: return "hypothesis-violation";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Usage: return "usage";
  }
  return "unknown";
}

/// Base of every error raised by the library; carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace conoflow
