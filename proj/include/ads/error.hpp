#pragma once

#include <stdexcept>
#include <string>

namespace ads {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was not met by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but numerically degenerate (zero matrix, constant image, ...).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Not enough samples to train a complete dictionary.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated or unsupported file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace ads
