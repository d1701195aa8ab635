#pragma once

#include <stdexcept>
#include <string>

namespace spatfun {

/// Raised when an experiment configuration cannot be parsed or validated.
class config_error : public std::runtime_error {
public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a numerical procedure fails (factorization breakdown,
/// degenerate spectrum, nonpositive losses in a log-log fit, ...).
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spatfun
