#pragma once

#include <stdexcept>
#include <string>

namespace hebbdim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by caller-supplied arguments.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Too few statistically significant points to fit a power law.
class InsufficientSignal : public Error {
 public:
  using Error::Error;
};

/// Too few records to fit a scaling law.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Numerical failure (singular covariance after all retries, etc).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace hebbdim
