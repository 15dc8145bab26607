#ifndef LOGEXT_ERROR_HPP
#define LOGEXT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace logext {

// Bad arguments: out-of-range states, negative times, unsorted inputs.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The operation needs r > 1 (x_star, X_star, V_star present) and was given r <= 1.
class NotSupercritical : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// X_star is too small for the requested supercritical quantity.
class WindowTooSmall : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Conditioning on an event of probability zero.
class NullConditioning : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A validation sequence does not satisfy the limit regime of the requested case.
class RegimeViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Too many simulated runs hit the time cap for the requested statistic.
class ExcessiveCensoring : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace logext

#endif  // LOGEXT_ERROR_HPP
