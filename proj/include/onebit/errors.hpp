#pragma once

#include <stdexcept>
#include <string>

namespace onebit {

/// Bad parameters, dimensions or file contents. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Filesystem failures, always carrying the offending path. Exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by a monitored solve when the potential function increases.
/// Exit code 3.
class DescentViolation : public std::runtime_error {
 public:
  explicit DescentViolation(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace onebit
