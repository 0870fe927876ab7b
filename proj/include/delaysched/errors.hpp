#pragma once

#include <stdexcept>
#include <string>

namespace delaysched {

/// Raised when rho1 + rho2 >= 1 (or rho_i >= 1 for a class alone); no steady state exists.
class UnstableSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The delay-tolerant class gains nothing from priority, so the gain ratio is undefined.
class DegenerateGapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The stationarity equation and the derivative disagree about where the root is.
class NumericalInconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A simulation produced no post-warm-up departures.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid configuration text.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace delaysched
