#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace divhash {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed input text; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// File could not be opened, read or written, or has the wrong layout.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace divhash
