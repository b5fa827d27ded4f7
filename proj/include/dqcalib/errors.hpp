#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dqcalib {

enum class ErrorCode {
  NonUnitDQ,
  OutOfRange,
  NoOverlap,
  TooFewPoints,
  DegenerateGeometry,
  InsufficientMotion,
  NumericalFailure,
  GridMismatch,
  InvalidSpec,
  NoForwardMotion,
  NoOverlapWindow,
  ParseError,
  IoError,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library is reported through this one type; callers
// branch on code() rather than on a class hierarchy.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }
  /// The message without the leading code name.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace dqcalib
