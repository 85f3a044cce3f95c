#pragma once

#include <stdexcept>
#include <string>

namespace predrisk {

// Bad argument values or broken type invariants detected before any numerics run.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Inputs that are syntactically fine but make the requested operation meaningless
// (zero-norm shrinkage input, empty sample, degenerate distribution).
class DegenerateInputError : public ValidationError {
 public:
  explicit DegenerateInputError(const std::string& what) : ValidationError(what) {}
};

// Numerics failed at runtime: quadrature did not converge, non-finite intermediate,
// overflow in a closed form. Message carries the diagnostic context.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed external input (CSV rows, config files). Message names the offending line.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace predrisk
