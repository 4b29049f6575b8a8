#pragma once

#include <stdexcept>
#include <string>

namespace rpsd {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration or parameter is outside its valid range.
class InvalidConfiguration : public Error {
 public:
  using Error::Error;
};

/// A selection law gives zero probability to some subspace.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// The averaged projection has an eigenvalue below the square-root floor.
class NearSingularError : public Error {
 public:
  using Error::Error;
};

/// Malformed or missing input data.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace rpsd
