#pragma once

#include <stdexcept>
#include <string>

namespace sweeplio {

// Base error. kind() is the stable machine-parseable class the CLI prints.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "runtime"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

// Malformed or inconsistent sensor data (gaps, out-of-order stamps, missing coverage).
class DataError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "data"; }
};

// Geometrically/numerically degenerate input (empty windows, rank loss, too few residuals).
class DegenerateError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate"; }
};

class InitError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "init"; }
};

class SolverError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "solver"; }
};

}  // namespace sweeplio
