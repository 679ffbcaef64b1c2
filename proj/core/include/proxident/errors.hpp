#pragma once

#include <stdexcept>
#include <string>

namespace proxident {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unknown variable, malformed table, wrong cardinality, bad argument.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Conditioning on an event of zero probability.
class ConditioningError : public Error {
 public:
  ConditioningError(std::string event, const std::string& what)
      : Error(what), event_(std::move(event)) {}
  const std::string& event() const noexcept { return event_; }

 private:
  std::string event_;
};

/// A positivity condition required by an identifying formula fails.
class PositivityError : public ConditioningError {
 public:
  using ConditioningError::ConditioningError;
};

/// Rejection sampling in the model generator ran out of retries.
class GenerationError : public Error {
 public:
  GenerationError(std::string constraint, const std::string& what)
      : Error(what), constraint_(std::move(constraint)) {}
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

/// An identifier could not produce its target from the observed law.
class IdentificationError : public Error {
 public:
  explicit IdentificationError(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Eigenvalues are not separated: the latent factors are not identified.
class NonIdentifiableError : public IdentificationError {
 public:
  using IdentificationError::IdentificationError;
};

/// Floating-point breakdown (e.g. complex eigenvalues on a real problem).
class NumericalError : public IdentificationError {
 public:
  using IdentificationError::IdentificationError;
};

/// Recovered probabilities are inconsistent (negative, zero mass, ...).
class RecoveryError : public IdentificationError {
 public:
  using IdentificationError::IdentificationError;
};

/// Alternating least squares did not converge from any start.
class ConvergenceError : public IdentificationError {
 public:
  ConvergenceError(const std::string& what, double best_fit)
      : IdentificationError(what, best_fit) {}
  double best_fit() const noexcept { return residual(); }
};

/// Label recovery found two latent states it cannot tell apart.
class LabelAmbiguityError : public IdentificationError {
 public:
  using IdentificationError::IdentificationError;
};

}  // namespace proxident
