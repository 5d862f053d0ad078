#pragma once

#include <stdexcept>
#include <string>

namespace kaclab {

/// Precondition or input-contract violation.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not reach its postcondition (bracket failure,
/// positivity not attainable, mean too far from zero for a finite d2, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace kaclab
