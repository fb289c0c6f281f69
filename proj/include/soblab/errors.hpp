#pragma once

#include <stdexcept>
#include <string>

namespace soblab {

enum class ErrorKind {
  InvalidDimension,
  ExponentOutOfRange,
  ParameterDomain,
  Format,
  InsufficientData,
  ConvergenceFailure,
  Domain,
  DivergentIntegral,
  StepSize,
  Admissibility,
  Precondition,
  HypothesisViolation,
  IllConditionedInverse,
  Io,
  Usage,
};

const char* to_string(ErrorKind kind);

// Every failure raised by the library carries one of the kinds above so that
// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace soblab
