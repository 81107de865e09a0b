#pragma once

#include <stdexcept>
#include <string>

namespace gzf {

/// Base of every error raised by the library. The CLI maps subclasses onto
/// exit codes (config 1, I/O 2, numeric 3, verification 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Content-level problem with otherwise readable input (bad label, empty file).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Binary container problems: PPM and checkpoint files.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// Misuse of the autodiff graph (double backward, backward on a constant).
class GraphError : public Error {
 public:
  using Error::Error;
};

}  // namespace gzf
