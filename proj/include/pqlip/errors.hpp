#pragma once

#include <stdexcept>
#include <string>

namespace pqlip {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Evaluation point outside the computational domain.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// Derivative requested at a kink or singular point of a coefficient.
class SingularPointError : public Error {
public:
  using Error::Error;
};

/// A norm of a coefficient is infinite on the requested region.
class DivergenceError : public Error {
public:
  using Error::Error;
};

/// A quadrature point hit a non-finite coefficient or density value.
class QuadratureSingularityError : public Error {
public:
  using Error::Error;
};

class IndexError : public Error {
public:
  using Error::Error;
};

class DegeneratePairError : public Error {
public:
  using Error::Error;
};

/// Moser ladder ratio 2*_s/(2m) is not larger than one.
class LadderDivergenceError : public Error {
public:
  using Error::Error;
};

/// Gradient cap below the Lipschitz constant of the boundary data.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

/// Configuration does not match the documented schema.
class SchemaError : public Error {
public:
  using Error::Error;
};

} // namespace pqlip
