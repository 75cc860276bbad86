#pragma once

#include <stdexcept>
#include <string>

namespace fkball {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the function (|x| >= 1, t <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

/// A finite-difference stencil would leave the domain of the evaluator.
class StencilError : public Error {
 public:
  using Error::Error;
};

class NonMonotoneRadial : public Error {
 public:
  using Error::Error;
};

class NoWitnessFound : public Error {
 public:
  using Error::Error;
};

}  // namespace fkball
