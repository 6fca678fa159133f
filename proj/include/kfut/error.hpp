#pragma once

#include <stdexcept>
#include <string>

namespace kfut {

enum class ErrorKind {
  shape,         // jets or tensors with mismatched num_vars / order / dimension
  singular,      // division by a jet with zero constant term, log/sqrt of non-positive
  out_of_order,  // derivative requested beyond the jet order
  order,         // not enough jet orders for the requested geometry
  not_kahler,    // metric not positive definite
  degenerate,    // symplectic form singular
  unsupported,   // invariant polynomial / dimension outside what is implemented
  invalid_field, // holomorphic field failed its residual checks
  precision,     // quadrature did not converge or two routes disagree
  evaluation,    // non-finite value at a quadrature node
  parse,         // malformed expression or spec document
  usage,         // bad CLI input
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::shape: return "shape";
    case ErrorKind::singular: return "singular";
    case ErrorKind::out_of_order: return "out_of_order";
    case ErrorKind::order: return "order";
    case ErrorKind::not_kahler: return "not_kahler";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::invalid_field: return "invalid_field";
    case ErrorKind::precision: return "precision";
    case ErrorKind::evaluation: return "evaluation";
    case ErrorKind::parse: return "parse";
    case ErrorKind::usage: return "usage";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace kfut
