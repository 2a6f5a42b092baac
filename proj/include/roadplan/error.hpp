#pragma once

#include <stdexcept>
#include <string>

namespace roadplan {

/// Malformed input text. The message carries the line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Well-formed input that violates a model invariant (bad selector,
/// disconnected demand, duplicate ids, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure inside a solver (non-finite latency, degenerate gap).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace roadplan
