#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qcomm {

/// Input text that does not follow the edge-list or branch-table format.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Well-formed input outside the mathematical domain (zero weights, K > n, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A bit vector that does not decode to a valid assignment.
class FeasibilityError : public std::runtime_error {
public:
  FeasibilityError(std::size_t row, const std::string& what)
      : std::runtime_error(what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

private:
  std::size_t row_;
};

class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace qcomm
