#include "fvfseg/error.hpp"

namespace fvfseg {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidParameter:
      return "invalid_parameter";
    case ErrorCode::EmptyRegion:
      return "empty_region";
    case ErrorCode::Range:
      return "range";
    case ErrorCode::Grid:
      return "grid_mismatch";
    case ErrorCode::Format:
      return "format";
    case ErrorCode::Truncation:
      return "truncated";
    case ErrorCode::UnsupportedDtype:
      return "unsupported_dtype";
    case ErrorCode::Io:
      return "io";
    case ErrorCode::Normalization:
      return "normalization";
    case ErrorCode::InsufficientData:
      return "insufficient_data";
    case ErrorCode::Numerical:
      return "numerical";
    case ErrorCode::NoCandidate:
      return "no_candidate";
    case ErrorCode::NumericalInstability:
      return "numerical_instability";
    case ErrorCode::Config:
      return "config";
  }
  return "unknown";
}

}  // namespace fvfseg
