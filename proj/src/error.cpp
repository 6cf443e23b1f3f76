#include "activeflow/error.hpp"

namespace activeflow {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::AdmissibilityViolation: return "AdmissibilityViolation";
    case ErrorKind::NumericalBlowup: return "NumericalBlowup";
    case ErrorKind::RadiusTooLarge: return "RadiusTooLarge";
    case ErrorKind::ZeroPeclet: return "ZeroPeclet";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::NegativeField: return "NegativeField";
    case ErrorKind::TooFewSnapshots: return "TooFewSnapshots";
    case ErrorKind::NonpositiveValue: return "NonpositiveValue";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::IterationStall: return "IterationStall";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ConfigMismatch: return "ConfigMismatch";
  }
  return "Unknown";
}

}  // namespace activeflow
