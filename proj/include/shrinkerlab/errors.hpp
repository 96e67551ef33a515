#pragma once

#include <stdexcept>
#include <string>

namespace shrinkerlab {

// Bad input: out-of-domain parameters, unknown catalog names, malformed flags.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// The numbers cannot be trusted: degenerate metric, unresolved grid, tail-bound violation.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace shrinkerlab
