#pragma once

#include <string_view>

#include "delaysched/mg1_analytics.hpp"
#include "delaysched/traffic_model.hpp"

namespace delaysched {

/// log V(alpha) = beta1 log U1(l1(alpha)) + beta2 log U2(l2(alpha)).
double log_system_utility(const SystemConfig& cfg, double alpha);
double log_system_utility(const SystemConfig& cfg, const PriorityDelayTable& table, double alpha);

/// dZ/dalpha with Z = log V, in the closed logistic form.
double z_prime(const SystemConfig& cfg, double alpha);
double z_prime(const SystemConfig& cfg, const PriorityDelayTable& table, double alpha);

/// Constants of the stationarity equation
///   g(alpha) = tolerant_scale e^{alpha tolerant_rate}
///            - sensitive_scale e^{alpha sensitive_rate} + offset = 0.
struct OptimalityConstants {
  /// beta1 a1 gap1 / (beta2 a2 gap2); ratio of the two classes' marginal gains.
  double gain_ratio = 0.0;
  double tolerant_scale = 0.0;   // gain_ratio e^{a2 (b2 - l22)}
  double tolerant_rate = 0.0;    // a2 (l22 - l21) <= 0
  double sensitive_scale = 0.0;  // e^{a1 (b1 - l12)}
  double sensitive_rate = 0.0;   // a1 (l12 - l11) >= 0
  double offset = 0.0;           // gain_ratio - 1

  /// Exponents are combined before exponentiation and clamped once, so g keeps
  /// its sign over a wider range than the product of separately clamped factors.
  double equation(const PriorityDelayTable& table, const SystemConfig& cfg, double alpha) const;
};

/// Throws DegenerateGapError when class 2 has no priority gap.
OptimalityConstants optimality_constants(const SystemConfig& cfg);
OptimalityConstants optimality_constants(const SystemConfig& cfg, const PriorityDelayTable& table);

enum class AlphaBranch { kInterior, kClampedZero, kClampedOne };

std::string_view to_string(AlphaBranch branch);

struct AlphaSolution {
  double alpha = 0.0;
  AlphaBranch branch = AlphaBranch::kInterior;
  double log_utility = 0.0;
  double slope_at_zero = 0.0;  // Z'(0)
  double slope_at_one = 0.0;   // Z'(1)
};

/// Bisection stops once the bracket is this narrow.
inline constexpr double kAlphaTolerance = 1e-10;

/// Delay-optimal time-sharing fraction. Clamps to an endpoint when Z' keeps one
/// sign on [0, 1]; otherwise bisects on the sign of Z' and checks that the
/// stationarity equation g changes sign as well (NumericalInconsistencyError if not).
AlphaSolution solve_alpha(const SystemConfig& cfg);

}  // namespace delaysched
