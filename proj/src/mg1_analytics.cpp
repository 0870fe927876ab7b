#include "delaysched/mg1_analytics.hpp"

#include <sstream>
#include <stdexcept>

#include "delaysched/errors.hpp"

namespace delaysched {

double residual_time(const SystemConfig& cfg, ClassId of, ClassId priority) {
  if (of == priority) return cfg.of(of).arrival_rate * cfg.second_moment(of) / 2.0;
  double sum = 0.0;
  for (ClassId id : kClasses) sum += cfg.of(id).arrival_rate * cfg.second_moment(id);
  return sum / 2.0;
}

double priority_delay(const SystemConfig& cfg, ClassId of, ClassId priority) {
  const double service = cfg.mean_service_time(of);
  const double residual = residual_time(cfg, of, priority);
  if (of == priority) {
    const double rho = cfg.utilization(of);
    if (!(1.0 - rho > 0.0)) {
      std::ostringstream msg;
      msg << "unstable system: rho" << number_of(of) << "=" << rho << " >= 1";
      throw UnstableSystemError(msg.str());
    }
    return (residual + (1.0 - rho) * service) / (1.0 - rho);
  }
  cfg.require_stable();
  const double idle = 1.0 - cfg.total_utilization();
  const double rho_priority = cfg.utilization(priority);
  return (residual + idle * service) / ((1.0 - rho_priority) * idle);
}

double PriorityDelayTable::delay(ClassId of, ClassId priority) const {
  if (of == ClassId::kOne) return of == priority ? class1_prioritized : class1_deferred;
  return of == priority ? class2_prioritized : class2_deferred;
}

PriorityDelayTable delay_table(const SystemConfig& cfg) {
  cfg.require_stable();
  PriorityDelayTable table;
  table.class1_prioritized = priority_delay(cfg, ClassId::kOne, ClassId::kOne);
  table.class1_deferred = priority_delay(cfg, ClassId::kOne, ClassId::kTwo);
  table.class2_deferred = priority_delay(cfg, ClassId::kTwo, ClassId::kOne);
  table.class2_prioritized = priority_delay(cfg, ClassId::kTwo, ClassId::kTwo);
  return table;
}

BlendedDelays blended_delay(const PriorityDelayTable& table, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error("alpha must lie in [0, 1]");
  return {
      .class1 = alpha * table.class1_prioritized + (1.0 - alpha) * table.class1_deferred,
      .class2 = (1.0 - alpha) * table.class2_prioritized + alpha * table.class2_deferred,
      .alpha = alpha,
  };
}

}  // namespace delaysched
