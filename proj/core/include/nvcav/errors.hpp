#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nvcav {

// Invalid input data or a violated precondition. CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The inputs admit no solution: flat scan, empty excitation region,
// zero field, scan not covering the resonance. CLI exit code 2.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoResonanceError : public DegenerateError {
 public:
  using DegenerateError::DegenerateError;
};

// The rate graph has more than one absorbing component, so the stationary
// distribution is not unique. Components are lists of 1-based level indices.
class NonUniqueSteadyStateError : public DegenerateError {
 public:
  NonUniqueSteadyStateError(const std::string& what,
                            std::vector<std::vector<int>> components)
      : DegenerateError(what), components_(std::move(components)) {}

  const std::vector<std::vector<int>>& components() const { return components_; }

 private:
  std::vector<std::vector<int>> components_;
};

// An iterative solver exhausted its budget. CLI exit code 3.
class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nvcav
