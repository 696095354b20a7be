#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace teig {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (mesh files, coefficient expressions, configs).
/// `offset` is a byte offset for expressions; `line`/`column` are 1-based
/// positions for line-oriented files (0 when not applicable).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset, std::size_t line = 0, std::size_t column = 0)
      : Error(what), offset_(offset), line_(line), column_(column) {}

  std::size_t offset() const noexcept { return offset_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t offset_;
  std::size_t line_;
  std::size_t column_;
};

/// Invalid user configuration or invalid arguments to a public operation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: singular factorization, non-convergence.
class SolverError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace teig
