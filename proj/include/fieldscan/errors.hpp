#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fieldscan {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or precondition violated by the caller (bad k, eps <= 0, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Schema violations: unknown or duplicate attributes, kind mismatches.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be processed as given.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed CSV. `line()` is 1-based and counts physical lines.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace fieldscan
