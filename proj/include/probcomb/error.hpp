#pragma once

#include <stdexcept>
#include <string>

namespace probcomb {

// Base of every error raised by the library. The subclasses map onto the
// CLI exit statuses (see exit_code()).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite or out-of-range numeric argument.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Two series or matrices that do not share the same sample-id set.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (files, names, schemas).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Violation of a model constraint: even-K majority vote, theta outside
// (0.5, 1), negative combiner weight.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class ExitCode : int {
  ok = 0,
  validation = 2,
  constraint = 3,
  io = 4,
};

inline ExitCode exit_code(const Error& e) {
  if (dynamic_cast<const ConstraintError*>(&e) != nullptr) return ExitCode::constraint;
  if (dynamic_cast<const IoError*>(&e) != nullptr) return ExitCode::io;
  return ExitCode::validation;
}

}  // namespace probcomb
