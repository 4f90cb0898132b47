#pragma once

#include <stdexcept>
#include <string>

namespace qig {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violated a documented precondition (domain, range, shape).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// A numerical routine failed to converge or produced an unusable result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A perturbation is not small enough for the requested construction,
/// i.e. its norm is not strictly below the hood radius 1 - beta.
class SmallnessError : public PreconditionError {
 public:
  SmallnessError(const std::string& what, double norm, double radius)
      : PreconditionError(what), norm_(norm), radius_(radius) {}

  double norm() const noexcept { return norm_; }
  double radius() const noexcept { return radius_; }

 private:
  double norm_;
  double radius_;
};

/// A state or score was used with a base point it was not built over.
class ProvenanceError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

}  // namespace qig
