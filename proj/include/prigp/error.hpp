#pragma once

#include <stdexcept>
#include <string>

namespace prigp {

// Error taxonomy. The CLI maps ConfigError to exit code 2 and NumericError to 3.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad caller input: dimension mismatch, out-of-domain point, non-finite value.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Floating-point failure: factorization breakdown, NaN/Inf, nonpositive precision.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Violated call-order contract, e.g. predicting from a stale model.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (schema violation, out-of-range parameter).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace prigp
