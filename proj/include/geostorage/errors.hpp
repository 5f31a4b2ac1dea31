#pragma once

#include <stdexcept>
#include <string>

namespace geostorage {

/// Invalid user input: configuration values, PHX layout, run files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Internal inconsistency between grid, coefficients and assembled operators.
class AssemblyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Failure while advancing the time recursion.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, int step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  int step() const noexcept { return step_; }

 private:
  int step_;
};

}  // namespace geostorage
