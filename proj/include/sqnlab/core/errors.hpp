#pragma once

#include <stdexcept>
#include <string>

namespace sqnlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dense curvature matrix could not be factored as positive definite.
class FactorizationFailed : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// The curvature pair is too small to define an update (s ~ 0).
class DegenerateStep : public Error {
 public:
  using Error::Error;
};

/// No admissible stopping distribution exists for the given stepsizes.
class InvalidStepsize : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sqnlab
