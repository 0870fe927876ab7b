#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "delaysched/scheduler_zoo.hpp"
#include "delaysched/traffic_model.hpp"

namespace delaysched {

struct Packet {
  ClassId cls = ClassId::kOne;
  std::uint64_t sequence = 0;  // per-class arrival index
  double arrival_time = 0.0;
  double size = 0.0;            // bytes
  double remaining_work = 0.0;  // bytes
  double served_work = 0.0;     // bytes, summed over service segments
  double departure_time = std::numeric_limits<double>::quiet_NaN();
};

/// Draws a packet size in bytes. An empty sampler means constant size.
using WorkSampler = std::function<double(std::mt19937_64&)>;
using DepartureObserver = std::function<void(const Packet&)>;

struct SimRunSpec {
  SystemConfig config;
  SchedulerPolicy policy = PriorityTo{ClassId::kOne};
  double horizon = 2e6;  // s
  double warmup_fraction = 0.1;
  std::uint64_t seed = 1;
  /// Skip the stability precondition (saturation experiments).
  bool allow_unstable = false;
  std::array<WorkSampler, 2> work_samplers;
  /// Called for every departure, including warm-up ones.
  DepartureObserver on_departure;
};

struct ClassMetrics {
  std::uint64_t served = 0;    // post-warm-up departures
  std::uint64_t arrivals = 0;  // arrivals inside the measurement window
  double mean_sojourn = std::numeric_limits<double>::quiet_NaN();
  double sojourn_variance = std::numeric_limits<double>::quiet_NaN();
  double mean_in_system = 0.0;  // time average over the measurement window
  /// Mean of per-packet utilities; recorded for comparison only.
  double mean_packet_utility = std::numeric_limits<double>::quiet_NaN();
};

struct SimMetrics {
  std::array<ClassMetrics, 2> classes;
  double horizon = 0.0;
  double warmup = 0.0;  // s
  double busy_fraction = 0.0;
  /// Share of busy time during which class 1 was favored; NaN for policies without a favored class.
  double regime1_fraction = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
  std::string rng_algorithm;
  std::uint64_t preemptions = 0;
  std::uint64_t fifo_violations = 0;
  /// max |served_work - size| / size over all departures.
  double max_work_error = 0.0;

  const ClassMetrics& of(ClassId id) const { return classes[index_of(id)]; }
};

/// Runs one replication. Deterministic in (spec, seed). Throws
/// UnstableSystemError (unless allowed) or InsufficientDataError when no packet
/// departs after warm-up; throws std::logic_error if the server ever idles with
/// work waiting.
SimMetrics run(const SimRunSpec& spec);

/// Horizon that yields about `departures` post-warm-up departures.
double horizon_for_departures(const SystemConfig& cfg, double departures, double warmup_fraction);

struct Estimate {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double ci_half_width = std::numeric_limits<double>::quiet_NaN();  // 95%, normal approximation
  std::size_t samples = 0;
};

/// Sample mean and 95% half-width; NaN inputs are skipped. One sample gives a zero half-width.
Estimate estimate(std::span<const double> values);

struct ReplicateSummary {
  std::vector<SimMetrics> runs;
  std::array<Estimate, 2> sojourn;
  std::array<Estimate, 2> sojourn_variance;
  std::array<Estimate, 2> in_system;
  Estimate busy_fraction;
};

/// `n` independent runs seeded by replicate_seed(master_seed, k); runs may
/// execute on up to `jobs` threads without changing the result.
ReplicateSummary replicate(const SimRunSpec& spec, std::size_t n, std::uint64_t master_seed, unsigned jobs = 1);

/// Calls task(i) for i in [0, count) on up to `jobs` threads; rethrows the first failure.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& task);

}  // namespace delaysched
