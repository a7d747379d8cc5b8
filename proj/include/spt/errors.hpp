#pragma once

#include <stdexcept>
#include <string>

namespace spt {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// SNR estimate below the feasibility threshold gamma_bar.
class FeasibilityError : public DomainError {
 public:
  using DomainError::DomainError;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class BracketError : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Optimization problem has no feasible point (or the start is infeasible).
class Infeasible : public Error {
 public:
  using Error::Error;
};

/// Initial point of an MM run violates a constraint even at the true SNRs.
class InfeasibleStart : public Infeasible {
 public:
  using Infeasible::Infeasible;
};

class ConvexityNotCertified : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario description; `field` names the offending JSON path.
class ScenarioError : public Error {
 public:
  ScenarioError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace spt
