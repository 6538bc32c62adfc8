#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace selmeta {

/// Bad arguments: non-finite coordinates, mismatched sizes, violated invariants.
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Integration produced a non-finite state.
class BlowUp : public std::runtime_error {
public:
  BlowUp(std::size_t step, const std::string& what)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

/// Shooting could not take a single finite trial step.
class SolverFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The sampler's initial state has no converged shooting solution.
class SamplerInitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DegenerateSeries : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Unknown preset, malformed config or failed validation.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace selmeta
