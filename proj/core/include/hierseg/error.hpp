#pragma once

#include <stdexcept>
#include <string>

namespace hierseg {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto exit codes: NumericalError -> 3, everything else -> 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed structured input (hierarchy description, config values).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Operands whose dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Index or rectangle outside its valid range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// A caller broke a documented precondition on numeric input.
class ContractError : public Error {
 public:
  using Error::Error;
};

// File contents that do not follow the expected encoding.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or infeasible run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Missing or unreadable/unwritable files.
class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite values during optimisation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace hierseg
