#pragma once

#include <stdexcept>
#include <string>

namespace lsip {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- linear algebra -------------------------------------------------------

class LinalgError : public Error {
 public:
  using Error::Error;
};

/// Rank-one inverse update whose denominator collapsed; refactorize instead.
class SingularUpdate : public LinalgError {
 public:
  using LinalgError::LinalgError;
};

class NonSymmetric : public LinalgError {
 public:
  using LinalgError::LinalgError;
};

class Singular : public LinalgError {
 public:
  using LinalgError::LinalgError;
};

// ---- problem data and oracles ---------------------------------------------

/// Malformed or inconsistent problem data.
class InvalidInstance : public Error {
 public:
  using Error::Error;
};

class InvalidQuery : public Error {
 public:
  using Error::Error;
};

/// An oracle returned a "separation" that does not separate.
class OracleContractViolation : public Error {
 public:
  using Error::Error;
};

class UnresolvableWitness : public Error {
 public:
  using Error::Error;
};

/// Certificate data violating its preconditions (non-positive weights, too
/// many witnesses, wrong dimension).
class InvalidCertificate : public Error {
 public:
  using Error::Error;
};

// ---- solver ---------------------------------------------------------------

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DegenerateColumn : public Error {
 public:
  using Error::Error;
};

class CoincidentPoints : public Error {
 public:
  using Error::Error;
};

/// The basic procedure ran past its proven iteration bound. Always a bug.
class IterationBoundViolated : public Error {
 public:
  using Error::Error;
};

}  // namespace lsip
