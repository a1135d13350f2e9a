#pragma once

#include <stdexcept>
#include <string>

namespace echolab {

// Precondition or configuration violations. The CLI maps these to exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Overflow, blowup, or loss of accuracy detected at run time (exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace echolab
