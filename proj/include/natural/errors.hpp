#pragma once

#include <stdexcept>
#include <string>

namespace natural {

// Base of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or mismatched inputs (grids, shapes, parameters).
class ConfigError : public Error {
  public:
    using Error::Error;
};

// Argument outside the domain where a formula is valid.
class DomainError : public Error {
  public:
    using Error::Error;
};

// A process has no driver representation, so its brackets are not available in closed form.
class UnsupportedProcess : public Error {
  public:
    using Error::Error;
};

class NotSupermartingale : public Error {
  public:
    using Error::Error;
};

// 1 - Z or its predictable projection is not strictly positive.
class HypothesisViolation : public Error {
  public:
    using Error::Error;
};

class InvalidFamily : public Error {
  public:
    using Error::Error;
};

// The solver produced a family that breaks an axiom on the exact oracle.
class SolverInconsistency : public Error {
  public:
    using Error::Error;
};

}  // namespace natural
