#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "core/matrix.hpp"

namespace feta {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class IdxMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IdxTruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IdxCountMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Thrown when iterates, gradients, or losses stop being finite. Carries the
// last finite iterate so callers can report partial progress.
class DivergedError : public Error {
 public:
  DivergedError(const std::string& msg, Matrix last)
      : Error(msg), last_iterate(std::move(last)) {}
  Matrix last_iterate;
};

}  // namespace feta
