#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace caid {

/// Invalid construction parameter (rule number, probability, v_max, thresholds).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A lattice holds a state outside the automaton's alphabet, or has the wrong dimensionality.
class AlphabetMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownAttribute : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NoReductFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by crisp rule induction on a table with conflicting rows.
class InconsistentInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No rule premise matched the neighborhood of a cell during model execution.
class NoMatchingRule : public std::runtime_error {
 public:
  NoMatchingRule(std::size_t cell, std::string pattern)
      : std::runtime_error("no rule matches cell " + std::to_string(cell) + " with pattern " + pattern),
        cell_(cell),
        pattern_(std::move(pattern)) {}

  std::size_t cell() const noexcept { return cell_; }
  const std::string& pattern() const noexcept { return pattern_; }

 private:
  std::size_t cell_;
  std::string pattern_;
};

/// Malformed input text. Line and column are 1-based; column 0 means "whole line".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column),
        message_(what) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  /// The error text without the position prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

}  // namespace caid
