#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eventflow {

// Base of every library error. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad sizes, empty input, bad parameter).
class DomainError : public Error {
 public:
  using Error::Error;
};

// KL divergence with mass where the reference has none.
class SupportError : public Error {
 public:
  using Error::Error;
};

// A date window contained no rows.
class EmptyWindowError : public Error {
 public:
  using Error::Error;
};

// Every jump offset of a curve was unsupported.
class EmptyCurveError : public Error {
 public:
  using Error::Error;
};

// A source does not cover an event (or a flow would need extrapolation).
class CoverageError : public Error {
 public:
  using Error::Error;
};

// A numeric routine failed to produce a finite answer.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; carries the 1-based line number (0 when not line-specific).
class IngestError : public Error {
 public:
  IngestError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace eventflow
