#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pam {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A model or grid violates one of its construction invariants.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// The regime classifier has no functional CLT for this model.
class UnsupportedRegimeError : public Error {
 public:
  using Error::Error;
};

/// Quadrature failed to reach the requested tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double partial, double achieved)
      : Error(what + " (partial=" + std::to_string(partial) +
              ", achieved_error=" + std::to_string(achieved) + ")"),
        partial_value(partial),
        achieved_error(achieved) {}
  double partial_value;
  double achieved_error;
};

/// Spectral synthesis could not produce a valid covariance on the torus.
class EmbeddingError : public Error {
 public:
  using Error::Error;
};

/// The lattice field exceeded the blow-up threshold.
class BlowUpError : public Error {
 public:
  BlowUpError(std::size_t site_index, double time, double value)
      : Error("numerical blow-up at site " + std::to_string(site_index) +
              ", t=" + std::to_string(time) + ", |U|=" + std::to_string(value)),
        site(site_index),
        t(time) {}
  std::size_t site;
  double t;
};

/// Blow-up inside one replica of an ensemble.
class ReplicaBlowUpError : public BlowUpError {
 public:
  ReplicaBlowUpError(std::size_t replica_index, const BlowUpError& cause)
      : BlowUpError(cause), replica(replica_index), message_("replica " + std::to_string(replica_index) + ": " + cause.what()) {}
  const char* what() const noexcept override { return message_.c_str(); }
  std::size_t replica;

 private:
  std::string message_;
};

/// Too few samples for the requested statistic.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace pam
