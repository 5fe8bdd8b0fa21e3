#pragma once

#include <stdexcept>
#include <string>

namespace sek {

/// Invalid input: wrong label, mismatched dimensions, out-of-range parameter.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operator that must be positive semi-definite has a significantly
/// negative eigenvalue.
class NotPsdError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// A constructed matrix or program exceeds the configured dimension cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// An iterative kernel (eigensolver, SDP) did not reach its tolerances.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sek
