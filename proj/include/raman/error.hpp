#pragma once

#include <stdexcept>
#include <string>

namespace raman {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched or invalid dimensions, mode indices, or spaces.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input that violates a documented precondition (negative rate, bad efficiency, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (step-size underflow, undefined normalization, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Parse failure in a text input; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace raman
