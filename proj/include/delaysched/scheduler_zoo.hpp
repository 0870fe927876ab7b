#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <variant>

#include "delaysched/traffic_model.hpp"

namespace delaysched {

/// Preempt-resume priority to one class.
struct PriorityTo {
  ClassId favored = ClassId::kOne;
};

enum class RegimeRule {
  /// Regime drawn Bernoulli(alpha) at the start of each busy period and held until the system empties.
  kBusyPeriod,
  /// Deterministic cycle: priority to class 1 for alpha * cycle_length, then class 2.
  kFixedCycle,
};

/// Time-shared priority: preempt-resume priority to class 1 for a long-run
/// fraction alpha of the time and to class 2 otherwise.
struct TimeShared {
  double alpha = 0.5;
  RegimeRule rule = RegimeRule::kBusyPeriod;
  double cycle_length = 100.0;  // s, kFixedCycle only
};

/// Serves up to weights[i] packets of class i per round; non-preemptive.
struct WeightedRoundRobin {
  std::array<unsigned, 2> weights{1, 1};
};

/// Serves the class with the larger backlog in bytes, ties to class 1; non-preemptive.
struct MaxWeight {};

/// One packet per nonempty class in turn; non-preemptive.
struct FairRoundRobin {};

using SchedulerPolicy = std::variant<PriorityTo, TimeShared, WeightedRoundRobin, MaxWeight, FairRoundRobin>;

std::string policy_name(const SchedulerPolicy& policy);

/// Priority policies interrupt the packet in service when a more favored one arrives.
bool is_preemptive(const SchedulerPolicy& policy);

/// Throws std::invalid_argument on alpha outside [0,1], zero weights or a non-positive cycle.
void validate(const SchedulerPolicy& policy);

/// Waiting work as seen by the scheduler (the packet in service is not included).
struct QueueState {
  std::array<std::size_t, 2> packets{0, 0};
  std::array<double, 2> backlog_bytes{0.0, 0.0};

  bool empty(ClassId id) const { return packets[index_of(id)] == 0; }
  bool all_empty() const { return packets[0] == 0 && packets[1] == 0; }
};

/// Per-run mutable bookkeeping of a policy.
class PolicyState {
 public:
  explicit PolicyState(SchedulerPolicy policy);

  const SchedulerPolicy& policy() const { return policy_; }

  /// Class to serve next, or nullopt iff every queue is empty. For
  /// non-preemptive policies each call commits one service.
  std::optional<ClassId> select(const QueueState& queues, double now);

  /// Called when a packet arrives to an empty system.
  void on_busy_period_start(double now, std::mt19937_64& rng);

  /// Next time the favored class changes on its own (fixed-cycle time sharing only).
  std::optional<double> next_regime_switch(double now) const;

  /// Class currently favored by a priority-style policy.
  std::optional<ClassId> favored(double now) const;

  /// Remaining WRR credits of the class currently holding the round.
  unsigned round_credits() const { return credits_; }

 private:
  SchedulerPolicy policy_;
  ClassId regime_ = ClassId::kOne;
  ClassId turn_ = ClassId::kOne;
  unsigned credits_ = 0;
  bool started_ = false;
};

/// Weights inversely proportional to (b_i + 4/a_i) s_i, scaled by the smallest
/// power of ten that brings the smaller weight to at least `min_weight`, then
/// rounded to the nearest integer.
std::array<unsigned, 2> wrr_weights(const SystemConfig& cfg, unsigned min_weight = 40);

}  // namespace delaysched
