#pragma once

#include <stdexcept>
#include <string>

namespace rte {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or inconsistent inputs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File system failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed, truncated or version-mismatched files.
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

// Breakdown of a numerical procedure (complex spectra, singular blocks, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace rte
