#pragma once

#include <stdexcept>
#include <string>

namespace zonalclim {

/// Base of every error raised by the library. Each subclass names one
/// failure category so callers (CLI exit codes, HTTP status mapping) can
/// dispatch on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Malformed input stream. The message carries the line or byte offset.
class ParseError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

class FrequencyError : public Error {
 public:
  using Error::Error;
};

class UnsupportedVariableError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class CorruptionError : public Error {
 public:
  using Error::Error;
};

}  // namespace zonalclim
