#include "dqcalib/errors.hpp"

namespace dqcalib {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonUnitDQ: return "NonUnitDQ";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::InsufficientMotion: return "InsufficientMotion";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::NoForwardMotion: return "NoForwardMotion";
    case ErrorCode::NoOverlapWindow: return "NoOverlapWindow";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

}  // namespace dqcalib
