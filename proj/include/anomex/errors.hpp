#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace anomex {

enum class ErrorKind {
  InvalidArgument,
  ParseError,
  ValidationError,
  NonMonotoneInversion,
  Overflow,
  BracketFailure,
  PolicyCycle,
  SingularSystem,
  NoConvergence,
  CFLViolation,
  CheckFailed,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` is what callers branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace anomex
