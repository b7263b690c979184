#pragma once

#include <stdexcept>
#include <string>

namespace cpath {

// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or dimension mismatch between operands.
struct DimError : Error {
  using Error::Error;
};

// Input data violates a structural invariant (asymmetry beyond tolerance,
// inconsistent file contents, malformed JSON).
struct ValidationError : Error {
  using Error::Error;
};

// Registry lookup failed; message lists the available names.
struct NotFoundError : Error {
  using Error::Error;
};

// A matrix that must be (semi)definite is not; carries the offending
// eigenvalue.
struct NotPsdError : Error {
  NotPsdError(const std::string& msg, double min_eig_)
      : Error(msg), min_eig(min_eig_) {}
  double min_eig;
};

// Strict interiority (G(x) or Y positive definite) fails where required.
struct InteriorityError : Error {
  InteriorityError(const std::string& msg, double min_eig_)
      : Error(msg), min_eig(min_eig_) {}
  double min_eig;
};

// A linear system is numerically singular; carries the smallest singular
// value observed.
struct SingularSystemError : Error {
  SingularSystemError(const std::string& msg, double sigma_min_)
      : Error(msg), sigma_min(sigma_min_) {}
  double sigma_min;
};

// Iteration cap reached or a line search collapsed.
struct ConvergenceError : Error {
  using Error::Error;
};

// A working hypothesis (strict complementarity, SSOSC, nonempty tangent
// solution set) is numerically contradicted. The message names the signal.
struct AssumptionError : Error {
  using Error::Error;
};

}  // namespace cpath
