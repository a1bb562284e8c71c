#pragma once

#include <stdexcept>
#include <string>

namespace hubnet {

// Argument outside the mathematical domain of an operation (negative LST
// argument, K = 0, bottleneck parameters where a non-bottleneck is needed...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A stated precondition with a numeric threshold was violated. The threshold
// is kept so callers can report it.
class PreconditionError : public std::invalid_argument {
 public:
  PreconditionError(const std::string& what, double threshold)
      : std::invalid_argument(what), threshold_(threshold) {}
  double threshold() const noexcept { return threshold_; }

 private:
  double threshold_;
};

// Non-finite intermediate values inside a solver.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid experiment/network configuration; `field` is a dotted path into
// the JSON document (e.g. "network.p").
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace hubnet
