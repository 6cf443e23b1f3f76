#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace activeflow {

enum class ErrorKind {
  InvalidArgument,
  AdmissibilityViolation,
  NumericalBlowup,
  RadiusTooLarge,
  ZeroPeclet,
  WindowTooShort,
  NegativeField,
  TooFewSnapshots,
  NonpositiveValue,
  TooFewPoints,
  NotConverged,
  IterationStall,
  ParseError,
  ValidationError,
  IoError,
  ConfigMismatch,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a machine-readable kind. The
// step index is set for errors raised from inside a time-stepping loop.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::int64_t step = -1)
      : std::runtime_error(message), kind_(kind), step_(step) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::int64_t step() const noexcept { return step_; }

 private:
  ErrorKind kind_;
  std::int64_t step_;
};

}  // namespace activeflow
