#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace omegarm {

/// Malformed model text. line and column are 1-based; 0 means unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed input that violates a model invariant.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Out-of-range algorithm parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed a postcondition that should always hold.
class SolverError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace omegarm
