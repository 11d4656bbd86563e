#pragma once

#include <stdexcept>
#include <string>

namespace erw {

enum class ErrorKind {
  InvalidParameter,   // bad k, p, J or coefficients
  Domain,             // argument outside the function's domain or range
  Unsupported,        // operation not defined for this urn function
  NonDifferentiable,  // derivative requested at a jump
  InvalidState,       // process state violates its invariants
  InvalidTrajectory,  // trajectory outside Q(y)
  NoBifurcation,      // attractor pair requested below the critical point
  NoEscape,           // zero-cost launch from a point that is not unstable
  Resource,           // horizon too large for the memory budget
  ConventionMismatch, // CGF ODE left the inverse's domain
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace erw
