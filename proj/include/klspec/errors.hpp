#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace klspec {

enum class ErrorKind {
  NonHermitianInput,
  InvalidStateMatrix,
  DimensionMismatch,
  LengthMismatch,
  InvalidGrid,
  NotSchurStable,
  NotReachable,
  InvalidPrior,
  SigmaNotPositiveDefinite,
  NonpositivePhi,
  GridDependentNullspace,
  BoundaryProximity,
  LogOfNonpositive,
  LogSingularDirection,
  Cond1Violated,
  UnsupportedDimension,
  InvalidArgument,
  MonotonicityViolation,
  LineSearchStalled,
  MaxIterations,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so that front ends can
// map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace klspec
