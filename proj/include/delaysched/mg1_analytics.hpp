#pragma once

#include "delaysched/traffic_model.hpp"

namespace delaysched {

/// Mean residual work seen by an arriving class `of` packet while class
/// `priority` holds preemptive priority.
double residual_time(const SystemConfig& cfg, ClassId of, ClassId priority);

/// Mean sojourn time of class `of` under preempt-resume priority to class
/// `priority` in the two-class M/G/1 queue. Throws UnstableSystemError when
/// the relevant denominator is not positive.
double priority_delay(const SystemConfig& cfg, ClassId of, ClassId priority);

/// The four steady-state mean sojourn times of the two pure-priority systems.
struct PriorityDelayTable {
  double class1_prioritized = 0.0;  // class 1, priority to class 1
  double class1_deferred = 0.0;     // class 1, priority to class 2
  double class2_deferred = 0.0;     // class 2, priority to class 1
  double class2_prioritized = 0.0;  // class 2, priority to class 2

  /// Delay reduction class 1 gets from holding priority.
  double class1_gap() const { return class1_deferred - class1_prioritized; }
  double class2_gap() const { return class2_deferred - class2_prioritized; }

  /// Delay of class `of` when class `priority` is served first.
  double delay(ClassId of, ClassId priority) const;
};

PriorityDelayTable delay_table(const SystemConfig& cfg);

/// Mean delays of the time-shared policy that gives class 1 priority for a
/// fraction `alpha` of the time and class 2 otherwise.
struct BlendedDelays {
  double class1 = 0.0;
  double class2 = 0.0;
  double alpha = 0.0;
};

/// Throws std::domain_error unless 0 <= alpha <= 1.
BlendedDelays blended_delay(const PriorityDelayTable& table, double alpha);

}  // namespace delaysched
