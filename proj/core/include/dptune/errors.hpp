#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dptune {

/// Malformed or physically inconsistent configuration (bad keys, singular M, empty boxes).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state component became non-finite, or the ship left the divergence radius.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A decision vector left its search box.
class ParameterBoundsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The input matrix J(psi) B is too ill-conditioned to invert.
class ControlSingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dptune
