#pragma once

#include <stdexcept>
#include <string>

namespace nac {

/// Exit-code category carried by every library error.
enum class ErrorKind {
  validation = 2,  // bad input: config, MDP, shapes
  invariant = 3,   // a deterministic guarantee was violated at run time
  numeric = 4,     // solver failure or non-convergence
  io = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& what) : Error(ErrorKind::invariant, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace nac
