#pragma once

#include <stdexcept>
#include <string>

namespace hazrate {

// Precondition or domain violation in caller-supplied input.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Two grid-sampled objects were combined but live on different grids.
class GridMismatch : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// A numeric transform left its domain (underflow, inverse outside (0, 1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterative solver ran out of iterations or hit a degenerate step.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations)
      : std::runtime_error(what), iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

}  // namespace hazrate
