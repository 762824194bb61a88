#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rforge {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
public:
  explicit ParseError(const std::string& msg, std::size_t line = 0)
      : Error(line ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

// Degenerate geometry (collinear points, coincident atoms, ...).
class GeometryError : public Error {
public:
  using Error::Error;
};

// Residue is missing atoms required for the requested operation.
class IncompleteResidueError : public Error {
public:
  using Error::Error;
};

// Structure cannot supply a full k-atom neighborhood.
class ContextTooSmallError : public Error {
public:
  using Error::Error;
};

// Invalid model or run configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Non-finite value encountered in a numeric pipeline.
class NumericError : public Error {
public:
  using Error::Error;
};

} // namespace rforge
