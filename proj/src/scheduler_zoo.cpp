#include "delaysched/scheduler_zoo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace delaysched {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::optional<ClassId> favor(ClassId first, const QueueState& queues) {
  if (!queues.empty(first)) return first;
  if (!queues.empty(other(first))) return other(first);
  return std::nullopt;
}

struct CyclePosition {
  double start;
  bool first_half;
};

// Times within a relative 1e-12 of a boundary count as past it, so a switch
// event scheduled exactly at the boundary always observes the new regime.
CyclePosition cycle_position(const TimeShared& ts, double now) {
  const double k = std::floor(now / ts.cycle_length + 1e-12);
  const double start = k * ts.cycle_length;
  const double phase = now - start;
  return {start, phase < ts.alpha * ts.cycle_length * (1.0 - 1e-12)};
}

}  // namespace

std::string policy_name(const SchedulerPolicy& policy) {
  return std::visit(Overloaded{
                        [](const PriorityTo& p) {
                          return std::string("priority") + std::to_string(number_of(p.favored));
                        },
                        [](const TimeShared&) { return std::string("proposed"); },
                        [](const WeightedRoundRobin&) { return std::string("wrr"); },
                        [](const MaxWeight&) { return std::string("max_weight"); },
                        [](const FairRoundRobin&) { return std::string("fair_rr"); },
                    },
                    policy);
}

bool is_preemptive(const SchedulerPolicy& policy) {
  return std::holds_alternative<PriorityTo>(policy) || std::holds_alternative<TimeShared>(policy);
}

void validate(const SchedulerPolicy& policy) {
  if (const auto* ts = std::get_if<TimeShared>(&policy)) {
    if (!(ts->alpha >= 0.0 && ts->alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    if (ts->rule == RegimeRule::kFixedCycle && !(ts->cycle_length > 0.0))
      throw std::invalid_argument("cycle_length must be > 0");
  }
  if (const auto* wrr = std::get_if<WeightedRoundRobin>(&policy)) {
    if (wrr->weights[0] < 1 || wrr->weights[1] < 1) throw std::invalid_argument("WRR weights must be >= 1");
  }
}

PolicyState::PolicyState(SchedulerPolicy policy) : policy_(std::move(policy)) {
  validate(policy_);
  if (const auto* wrr = std::get_if<WeightedRoundRobin>(&policy_)) credits_ = wrr->weights[0];
  if (const auto* ts = std::get_if<TimeShared>(&policy_)) regime_ = ts->alpha >= 0.5 ? ClassId::kOne : ClassId::kTwo;
}

void PolicyState::on_busy_period_start(double, std::mt19937_64& rng) {
  if (const auto* ts = std::get_if<TimeShared>(&policy_); ts && ts->rule == RegimeRule::kBusyPeriod) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    regime_ = u(rng) < ts->alpha ? ClassId::kOne : ClassId::kTwo;
  }
}

std::optional<ClassId> PolicyState::favored(double now) const {
  if (const auto* p = std::get_if<PriorityTo>(&policy_)) return p->favored;
  if (const auto* ts = std::get_if<TimeShared>(&policy_)) {
    if (ts->rule == RegimeRule::kBusyPeriod) return regime_;
    return cycle_position(*ts, now).first_half ? ClassId::kOne : ClassId::kTwo;
  }
  return std::nullopt;
}

std::optional<double> PolicyState::next_regime_switch(double now) const {
  const auto* ts = std::get_if<TimeShared>(&policy_);
  if (!ts || ts->rule != RegimeRule::kFixedCycle || ts->alpha <= 0.0 || ts->alpha >= 1.0)
    return std::nullopt;
  const CyclePosition pos = cycle_position(*ts, now);
  return pos.first_half ? pos.start + ts->alpha * ts->cycle_length : pos.start + ts->cycle_length;
}

std::optional<ClassId> PolicyState::select(const QueueState& queues, double now) {
  if (queues.all_empty()) return std::nullopt;
  return std::visit(
      Overloaded{
          [&](const PriorityTo& p) { return favor(p.favored, queues); },
          [&](const TimeShared&) { return favor(*favored(now), queues); },
          [&](const WeightedRoundRobin& wrr) -> std::optional<ClassId> {
            // A class keeps the round while it has credits and packets; an empty
            // class forfeits its remaining credits without consuming time.
            if (credits_ == 0 || queues.empty(turn_)) {
              turn_ = other(turn_);
              credits_ = wrr.weights[index_of(turn_)];
            }
            if (queues.empty(turn_)) {
              turn_ = other(turn_);
              credits_ = wrr.weights[index_of(turn_)];
            }
            --credits_;
            return turn_;
          },
          [&](const MaxWeight&) -> std::optional<ClassId> {
            const double b1 = queues.backlog_bytes[0];
            const double b2 = queues.backlog_bytes[1];
            if (queues.empty(ClassId::kTwo) || (!queues.empty(ClassId::kOne) && b1 >= b2)) return ClassId::kOne;
            return ClassId::kTwo;
          },
          [&](const FairRoundRobin&) -> std::optional<ClassId> {
            ClassId next = started_ ? other(turn_) : ClassId::kOne;
            if (queues.empty(next)) next = other(next);
            turn_ = next;
            started_ = true;
            return next;
          },
      },
      policy_);
}

std::array<unsigned, 2> wrr_weights(const SystemConfig& cfg, unsigned min_weight) {
  std::array<double, 2> raw{};
  for (ClassId id : kClasses) {
    const ClassParams& p = cfg.of(id);
    const double requirement = p.curve.inflection + 4.0 / p.curve.steepness;
    raw[index_of(id)] = 1.0 / (requirement * p.packet_size);
  }
  const double smallest = std::min(raw[0], raw[1]);
  const double target = std::max(1u, min_weight);
  const double scale = std::pow(10.0, std::ceil(std::log10(target / smallest) - 1e-12));
  std::array<unsigned, 2> weights{};
  for (std::size_t i = 0; i < 2; ++i)
    weights[i] = std::max(1u, static_cast<unsigned>(std::lround(raw[i] * scale)));
  return weights;
}

}  // namespace delaysched
