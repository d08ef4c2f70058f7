#pragma once

#include <stdexcept>
#include <string>

namespace tvar {

// Malformed inputs or broken preconditions detectable before any numerics
// (bad config fields, size mismatches, parameters outside their legal range).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inputs outside the mathematical domain of an operation: evaluation time
// outside (0,1], an AR polynomial outside the stability region where
// stationarity is required, a non-positive-definite matrix under a fractional
// power.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iteration failed to converge or a computed quantity failed an internal
// consistency check (root-finder residual, quadrature imaginary residue, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failures while reading configs or writing artifacts.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tvar
