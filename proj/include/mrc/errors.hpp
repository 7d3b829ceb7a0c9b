#pragma once

#include <stdexcept>
#include <string>

namespace mrc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File or directory level failure (missing path, unreadable file).
struct IoError : Error {
  using Error::Error;
};

/// Malformed annotation or instance content. Carries the 1-based line number
/// when the failure can be pinned to a line.
struct ParseError : Error {
  int line = 0;
  explicit ParseError(const std::string& msg, int line_no = 0)
      : Error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg : msg),
        line(line_no) {}
};

/// Invalid schema, template set, or run configuration.
struct ConfigError : Error {
  using Error::Error;
};

/// Caller passed data violating an operation precondition.
struct InputError : Error {
  using Error::Error;
};

/// Optimization failure (divergence, non-finite loss).
struct TrainError : Error {
  using Error::Error;
};

}  // namespace mrc
