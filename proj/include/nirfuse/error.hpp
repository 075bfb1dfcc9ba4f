#pragma once

#include <stdexcept>
#include <string>

namespace nirfuse {

/// Base of every exception thrown by the library. The C API maps each
/// subclass onto one status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad shapes, channel counts, out-of-range parameters.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or truncated files, unsupported formats.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or weight files.
class ParseError : public IoError {
 public:
  using IoError::IoError;
};

/// Inputs outside a function's mathematical domain (z <= 0, empty mask).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// NaN or infinity appeared in solver state.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace nirfuse
