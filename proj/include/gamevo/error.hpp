#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gamevo {

// Malformed or inconsistent input data (files, schemas, covariates).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: singular systems, degenerate criteria.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Formula DSL syntax error with 1-based position.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, std::size_t column, const std::string &message)
      : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                           std::to_string(column) + ": " + message),
        line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

} // namespace gamevo
