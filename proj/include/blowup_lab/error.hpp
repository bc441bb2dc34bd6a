#pragma once

#include <stdexcept>
#include <string>

namespace blowup_lab {

// Base class for every failure raised by the library. The CLI maps
// PreconditionError subclasses to exit code 2 and everything else to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the documented domain of an operation (bad parameters,
// unknown catalog ids, t0 > T, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// phi^{-1}(y) requested outside the reachable range of phi.
class RangeError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class UnsupportedError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// A theorem mode was requested whose hypotheses are not met.
class IneligibleModeError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// The renewal integral converges below its target: no finite blowup
// time can be certified.
class NoBlowupCertificateError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// Truncated jump approximation is too coarse for the requested time.
class RefinementError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

// An improper integral does not converge (tail or endpoint exponent test).
class DivergenceError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

}  // namespace blowup_lab
