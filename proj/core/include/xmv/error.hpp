#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xmv {

// Root of every error raised by the library. The CLI maps subclasses onto
// exit codes, so new error kinds should derive from the closest category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad numeric input to a vector operation.
class NormalizationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or arguments supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. `row()` is 1-based and counts the header line;
// 0 means the error is not tied to a particular row.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row = 0)
      : Error(row == 0 ? what : "row " + std::to_string(row) + ": " + what),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace xmv
