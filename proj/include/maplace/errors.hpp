// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace maplace {

enum class ErrorCode {
  InvalidArgument,
  DomainError,
  DegenerateGeometry,
  EndfireSingularity,
  SingularMoments,
  SupportOverflow,
  InfeasibleAperture,
  SpacingViolation,
  SearchSpaceTooLarge,
  AllPointsDegenerate,
};

inline std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::EndfireSingularity: return "EndfireSingularity";
    case ErrorCode::SingularMoments: return "SingularMoments";
    case ErrorCode::SupportOverflow: return "SupportOverflow";
    case ErrorCode::InfeasibleAperture: return "InfeasibleAperture";
    case ErrorCode::SpacingViolation: return "SpacingViolation";
    case ErrorCode::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::AllPointsDegenerate: return "AllPointsDegenerate";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace maplace
