#include "klspec/errors.hpp"

namespace klspec {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonHermitianInput: return "NonHermitianInput";
    case ErrorKind::InvalidStateMatrix: return "InvalidStateMatrix";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::NotSchurStable: return "NotSchurStable";
    case ErrorKind::NotReachable: return "NotReachable";
    case ErrorKind::InvalidPrior: return "InvalidPrior";
    case ErrorKind::SigmaNotPositiveDefinite: return "SigmaNotPositiveDefinite";
    case ErrorKind::NonpositivePhi: return "NonpositivePhi";
    case ErrorKind::GridDependentNullspace: return "GridDependentNullspace";
    case ErrorKind::BoundaryProximity: return "BoundaryProximity";
    case ErrorKind::LogOfNonpositive: return "LogOfNonpositive";
    case ErrorKind::LogSingularDirection: return "LogSingularDirection";
    case ErrorKind::Cond1Violated: return "Cond1Violated";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorKind::LineSearchStalled: return "LineSearchStalled";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace klspec
