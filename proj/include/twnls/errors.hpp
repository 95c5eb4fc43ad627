#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace twnls {

/// Compact decimal text for error messages.
inline std::string num_text(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

/// Bad parameter or precondition violated by the caller.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two operands live on different grids.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base for failures of a numerical computation (CLI exit code 1).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Data not resolved by the truncated basis, or non-finite samples.
class RepresentabilityError : public NumericalError {
 public:
  RepresentabilityError(const std::string& what, std::ptrdiff_t index = -1)
      : NumericalError(what), index_(index) {}
  /// Node or time index at which the failure was detected, -1 if none.
  std::ptrdiff_t index() const { return index_; }

 private:
  std::ptrdiff_t index_;
};

class NonContractionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Requested interval longer than the admissible local time.
class TimeStepTooLarge : public NumericalError {
 public:
  TimeStepTooLarge(const std::string& what, double suggested)
      : NumericalError(what), suggested_(suggested) {}
  double suggested() const { return suggested_; }

 private:
  double suggested_;
};

class SingularTimeError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ConvolutionCapError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

}  // namespace twnls
