#pragma once

#include <stdexcept>

namespace contlearn {

// Base of every error thrown by the library. The CLI maps subclasses to
// exit codes: ConfigError -> 1, IoError -> 3, everything else -> 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An argument value is outside its documented domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A named entity (head id, config key) does not exist.
class LookupError : public Error {
 public:
  using Error::Error;
};

// An API is called out of protocol (stale cache, duplicate head, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

// An operation requires a mode the object is not in (e.g. linear-only).
class ModeError : public Error {
 public:
  using Error::Error;
};

// A computation produced or received non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// An index or epoch lies outside the recorded range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Config text failed to parse or validate.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem read/write failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace contlearn
