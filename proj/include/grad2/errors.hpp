#pragma once

#include <stdexcept>
#include <string>

namespace grad2 {

// Bad input or a violated precondition. The CLI maps this to exit status 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Integration or solver failure (overflow, step underflow, degenerate fit).
// The CLI maps this to exit status 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A sampled hypothesis probe found a counterexample, e.g. a non-positive
// ratio while estimating the local quadratic-control constants.
class HypothesisViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace grad2
