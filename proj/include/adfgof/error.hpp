#pragma once

#include <stdexcept>
#include <string>

namespace adfgof {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unknown model name, invalid config value, mismatched table, ...
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Drift evaluated non-positive where the model requires S > 0.
class RegularityViolation : public Error {
 public:
  using Error::Error;
};

/// The model carries no information about theta (J = 0, C = 0).
class DegenerateModel : public Error {
 public:
  using Error::Error;
};

/// Denominator (1 - I2)^2 + I4*I6 of the Fredholm solution vanished.
class KernelSingularity : public Error {
 public:
  using Error::Error;
};

/// phi2 <= 0 inside the transform window.
class PositivityViolation : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace adfgof
