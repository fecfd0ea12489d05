#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mdpode {

// Base of every error thrown by the library. Derived types let callers (the
// CLI in particular) map failures onto stable exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension or layout mismatch between objects that must agree.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A value violates a documented invariant (negative probability, bad row sum,
// non-finite entry, reducible chain, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Reducible or periodic chain. Names one pair of states that never becomes
// mutually reachable at a common horizon.
class ReducibilityError : public ValidationError {
 public:
  ReducibilityError(const std::string& what, std::size_t from, std::size_t to)
      : ValidationError(what), from_(from), to_(to) {}
  std::size_t from() const { return from_; }
  std::size_t to() const { return to_; }

 private:
  std::size_t from_;
  std::size_t to_;
};

// Numerically singular linear system: the chain violates its preconditions.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

// Scalar parameter outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// P(x,x') > 0 where P0(x,x') = 0, so the divergence rate is infinite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Iterative solver stopped without meeting its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

// Control input left the admissible set of a generator model.
class FeasibilityError : public Error {
 public:
  FeasibilityError(const std::string& what, std::size_t state, double value)
      : Error(what), state_(state), value_(value) {}
  std::size_t state() const { return state_; }
  double value() const { return value_; }

 private:
  std::size_t state_;
  double value_;
};

// Trajectory integration aborted. Records the last sample that was accepted.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, std::size_t last_good_index, double last_good_zeta)
      : Error(what), last_good_index_(last_good_index), last_good_zeta_(last_good_zeta) {}
  std::size_t last_good_index() const { return last_good_index_; }
  double last_good_zeta() const { return last_good_zeta_; }

 private:
  std::size_t last_good_index_;
  double last_good_zeta_;
};

// Caller asked for something outside an operation's supported scale.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Model file could not be read.
class IoError : public Error {
 public:
  using Error::Error;
};

// Model file was read but is malformed; the message names the offending field.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace mdpode
