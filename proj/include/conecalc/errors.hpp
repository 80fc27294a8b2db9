#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace conecalc {

/// Argument outside the mathematical domain of an operation (bad dimension,
/// parameter out of range, zero vector, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Work would exceed a configured cap (subset enumeration, 2^n families).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative numerical routine did not converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two routes that must agree (fast path vs definition, closed form vs
/// bisection) disagreed beyond tolerance.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Rejection sampling could not produce a member of a cone.
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation at a kernel pole or on the singular set where no jet exists.
class PoleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Polar functions require p >= 2.
class UnsupportedPolarError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A finite-difference stencil left the grid or touched the singular mask.
class StencilError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// No admissible stencil frame exists at some unknown of a Dirichlet problem.
class DiscretizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed textual input; `position` is a 0-based character offset.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace conecalc
