#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dogsgd {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (dimension mismatch, NaN, bad trace).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter outside its admissible domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Non-finite state or a runaway step size. Carries the failing step.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : Error("diverged at step " + std::to_string(step) + ": " + what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Delimited-text parse failure; row is the 1-based line number in the file.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& column, const std::string& what)
      : Error("line " + std::to_string(row) + ", column '" + column + "': " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

/// Invalid experiment configuration; the message starts with the field path.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace dogsgd
