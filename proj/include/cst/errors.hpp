#pragma once

#include <stdexcept>
#include <string>

namespace cst {

/// Bad configuration value or violated precondition. CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File could not be read, written, or parsed. CLI exit code 3.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Artifact digests or dimensions disagree between producer and consumer.
/// CLI exit code 4.
struct CompatError : std::runtime_error {
  explicit CompatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite values where finite ones are required. CLI exit code 5.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cst
