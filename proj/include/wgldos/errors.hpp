#pragma once

#include <stdexcept>
#include <string>

namespace wgldos {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate or invalid cross-section / mesh input.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the supported numerical range (table bounds, overflow).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Evaluation at a singular point of a kernel.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical or physical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Quadrature, factorization or refinement failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// No resonance could be extracted from a spectrum.
class NoModeError : public Error {
 public:
  using Error::Error;
};

/// Operation called with inputs that do not fit together.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Two computations that must agree did not.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// Configuration file could not be parsed or failed schema validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace wgldos
