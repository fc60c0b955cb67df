#pragma once

#include <stdexcept>
#include <string>

namespace ttrack {

/// Invalid argument, dimension mismatch, or malformed configuration.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical breakdown: failed factorization or a non-finite state.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ttrack
