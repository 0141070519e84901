#pragma once

#include <stdexcept>
#include <string>

namespace plap {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of the operation (r <= 0, t <= 0, negative density, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Derivatives requested at a pole of the fundamental solution.
class PoleSingularityError : public Error {
 public:
  using Error::Error;
};

/// Zero direction vector passed where a direction is required.
class DegenerateDirectionError : public Error {
 public:
  using Error::Error;
};

/// p-Laplacian requested where it has no continuous extension (p < 2, vanishing gradient).
class UndefinedOperatorError : public Error {
 public:
  using Error::Error;
};

class UnsupportedConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Derivative of a min-of-affine term requested on a kink.
class KinkError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Kernel derivative requested on the Barenblatt free boundary.
class NonDifferentiablePointError : public Error {
 public:
  using Error::Error;
};

class DegenerateConfigurationError : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace plap
