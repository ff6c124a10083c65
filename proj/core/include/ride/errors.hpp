#pragma once

#include <stdexcept>
#include <string>

namespace ride {

// Raised when a numeric quantity (activation, gradient, loss) turns NaN/Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by readers for malformed, truncated or mismatched files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace ride
