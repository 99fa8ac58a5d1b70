#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tpe {

// Root of every error the library throws. `kind()` is a stable,
// machine-readable tag that the CLI maps onto exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class InvalidArgument : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_argument"; }
};

class DimensionError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension_mismatch"; }
};

class NormalizationError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "normalization"; }
};

class IoError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

/// Malformed input file; `line()` is 1-based (0 when not line-oriented).
class ParseError : public Error {
public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)), line_(line) {}
  const char* kind() const noexcept override { return "parse"; }
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::string file_;
  std::size_t line_;
};

class DegenerateDataError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate_data"; }
};

class InsufficientDataError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "insufficient_data"; }
};

class DivergenceError : public Error {
public:
  explicit DivergenceError(std::size_t iteration)
      : Error("training diverged at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  const char* kind() const noexcept override { return "divergence"; }
  std::size_t iteration() const noexcept { return iteration_; }

private:
  std::size_t iteration_;
};

} // namespace tpe
