#include "delaysched/optimal_alpha.hpp"

#include <cmath>
#include <sstream>

#include "delaysched/errors.hpp"

namespace delaysched {

double log_system_utility(const SystemConfig& cfg, const PriorityDelayTable& table, double alpha) {
  const BlendedDelays delays = blended_delay(table, alpha);
  const ClassParams& c1 = cfg.of(ClassId::kOne);
  const ClassParams& c2 = cfg.of(ClassId::kTwo);
  return c1.weight * log_utility(c1.curve, delays.class1) +
         c2.weight * log_utility(c2.curve, delays.class2);
}

double log_system_utility(const SystemConfig& cfg, double alpha) {
  return log_system_utility(cfg, delay_table(cfg), alpha);
}

double z_prime(const SystemConfig& cfg, const PriorityDelayTable& table, double alpha) {
  const BlendedDelays delays = blended_delay(table, alpha);
  const ClassParams& c1 = cfg.of(ClassId::kOne);
  const ClassParams& c2 = cfg.of(ClassId::kTwo);
  const double gain1 = c1.weight * c1.curve.steepness * table.class1_gap();
  const double gain2 = c2.weight * c2.curve.steepness * table.class2_gap();
  // gain / (1 + e^{-a(l-b)}) == gain * logistic(a(l-b))
  return gain1 * logistic(c1.curve.steepness * (delays.class1 - c1.curve.inflection)) -
         gain2 * logistic(c2.curve.steepness * (delays.class2 - c2.curve.inflection));
}

double z_prime(const SystemConfig& cfg, double alpha) {
  return z_prime(cfg, delay_table(cfg), alpha);
}

OptimalityConstants optimality_constants(const SystemConfig& cfg, const PriorityDelayTable& table) {
  const ClassParams& c1 = cfg.of(ClassId::kOne);
  const ClassParams& c2 = cfg.of(ClassId::kTwo);
  const double denominator = c2.weight * c2.curve.steepness * table.class2_gap();
  if (denominator == 0.0)
    throw DegenerateGapError("class 2 delay does not depend on priority (l21 == l22)");

  OptimalityConstants k;
  k.gain_ratio = c1.weight * c1.curve.steepness * table.class1_gap() / denominator;
  k.tolerant_scale =
      k.gain_ratio * clamped_exp(c2.curve.steepness * (c2.curve.inflection - table.class2_prioritized));
  k.tolerant_rate = c2.curve.steepness * (table.class2_prioritized - table.class2_deferred);
  k.sensitive_scale = clamped_exp(c1.curve.steepness * (c1.curve.inflection - table.class1_deferred));
  k.sensitive_rate = c1.curve.steepness * (table.class1_deferred - table.class1_prioritized);
  k.offset = k.gain_ratio - 1.0;
  return k;
}

OptimalityConstants optimality_constants(const SystemConfig& cfg) {
  return optimality_constants(cfg, delay_table(cfg));
}

double OptimalityConstants::equation(const PriorityDelayTable& table, const SystemConfig& cfg,
                                     double alpha) const {
  const ClassParams& c1 = cfg.of(ClassId::kOne);
  const ClassParams& c2 = cfg.of(ClassId::kTwo);
  const double tolerant_exponent =
      c2.curve.steepness * (c2.curve.inflection - table.class2_prioritized) + alpha * tolerant_rate;
  const double sensitive_exponent =
      c1.curve.steepness * (c1.curve.inflection - table.class1_deferred) + alpha * sensitive_rate;
  return gain_ratio * clamped_exp(tolerant_exponent) - clamped_exp(sensitive_exponent) + offset;
}

std::string_view to_string(AlphaBranch branch) {
  switch (branch) {
    case AlphaBranch::kInterior: return "interior-root";
    case AlphaBranch::kClampedZero: return "clamped-0";
    case AlphaBranch::kClampedOne: return "clamped-1";
  }
  return "unknown";
}

AlphaSolution solve_alpha(const SystemConfig& cfg) {
  const PriorityDelayTable table = delay_table(cfg);
  AlphaSolution solution;
  solution.slope_at_zero = z_prime(cfg, table, 0.0);
  solution.slope_at_one = z_prime(cfg, table, 1.0);

  const auto finish = [&](double alpha, AlphaBranch branch) {
    solution.alpha = alpha;
    solution.branch = branch;
    solution.log_utility = log_system_utility(cfg, table, alpha);
    return solution;
  };

  const double z0 = solution.slope_at_zero;
  const double z1 = solution.slope_at_one;
  if (z0 * z1 > 0.0)
    return z0 > 0.0 ? finish(1.0, AlphaBranch::kClampedOne) : finish(0.0, AlphaBranch::kClampedZero);

  const OptimalityConstants constants = optimality_constants(cfg, table);
  if (z0 == 0.0) return finish(0.0, AlphaBranch::kInterior);
  if (z1 == 0.0) return finish(1.0, AlphaBranch::kInterior);

  // Z' is decreasing on [0, 1] (concave objective), so z0 > 0 > z1 here.
  const double g0 = constants.equation(table, cfg, 0.0);
  const double g1 = constants.equation(table, cfg, 1.0);
  if (!(g0 > 0.0 && g1 < 0.0)) {
    std::ostringstream msg;
    msg << "stationarity equation has no sign change on [0,1] (g(0)=" << g0 << ", g(1)=" << g1
        << ") although Z'(0)=" << z0 << ", Z'(1)=" << z1;
    throw NumericalInconsistencyError(msg.str());
  }

  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > kAlphaTolerance) {
    const double mid = 0.5 * (lo + hi);
    const double slope = z_prime(cfg, table, mid);
    if (slope == 0.0) {
      lo = hi = mid;
      break;
    }
    (slope > 0.0 ? lo : hi) = mid;
  }
  return finish(0.5 * (lo + hi), AlphaBranch::kInterior);
}

}  // namespace delaysched
