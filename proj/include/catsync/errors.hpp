#pragma once

#include <stdexcept>
#include <string>

namespace catsync {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input (configs, arguments).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The coupling violates the locking hypotheses (no admissible w₀, or the
/// averaged dissipation depends on φ).
class HypothesisError : public Error {
 public:
  enum class Kind { NoRoot, PhiDependent };
  HypothesisError(Kind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Numerical breakdown: divergence, non-positive multipliers, no bracket.
class NumericalError : public Error {
 public:
  enum class Kind { Divergence, NonPositive, NoBracket, BoundViolation };
  NumericalError(Kind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// A series order was requested before its predecessors were computed.
class MissingOrder : public Error {
 public:
  using Error::Error;
};

/// Enumeration request beyond the configured size limit.
class SizeLimit : public Error {
 public:
  using Error::Error;
};

}  // namespace catsync
