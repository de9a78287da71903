#pragma once

#include <stdexcept>

namespace relvar {

// Argument outside the mathematical domain of an operation.
struct domain_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed or insufficient input data (too few observations, bad file, ...).
struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Formally valid input that makes the requested quantity undefined, e.g. a
// constant path whose terminal variation is zero and poisons every ratio.
struct degenerate_input_error : input_error {
  using input_error::input_error;
};

// Invalid simulation or experiment configuration.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A truncated series/quadrature cannot meet the configured tolerance.
struct truncation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An estimated parameter fell outside the regime a formula is valid in.
struct regime_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace relvar
