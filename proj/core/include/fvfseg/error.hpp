#pragma once

#include <stdexcept>
#include <string>

namespace fvfseg {

enum class ErrorCode {
  InvalidParameter,
  EmptyRegion,
  Range,
  Grid,
  Format,
  Truncation,
  UnsupportedDtype,
  Io,
  Normalization,
  InsufficientData,
  Numerical,
  NoCandidate,
  NumericalInstability,
  Config,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code lets
/// callers (the CLI in particular) map failures onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the candidate pipeline; `step` is the 1-based pipeline step at
/// which the region became empty.
class NoCandidateError : public Error {
 public:
  NoCandidateError(int step, const std::string& what)
      : Error(ErrorCode::NoCandidate, what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

class InstabilityError : public Error {
 public:
  InstabilityError(int iteration, const std::string& what)
      : Error(ErrorCode::NumericalInstability, what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace fvfseg
