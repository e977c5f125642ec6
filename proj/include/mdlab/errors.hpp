#pragma once

#include <stdexcept>
#include <string>

namespace mdlab {

/// Invalid input: bad parameters, malformed config, violated preconditions.
/// The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// The request is well formed but cannot be computed (infinite moment,
/// unsupported tilt, enumeration budget exceeded). CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mdlab
