#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "delaysched/des_engine.hpp"
#include "delaysched/scheduler_zoo.hpp"
#include "delaysched/traffic_model.hpp"

namespace delaysched {

enum class SchedulerKind { kProposed, kPriority1, kPriority2, kWrr, kMaxWeight, kFairRr };

inline constexpr std::array<SchedulerKind, 6> kAllSchedulers{
    SchedulerKind::kProposed, SchedulerKind::kPriority1, SchedulerKind::kPriority2,
    SchedulerKind::kWrr,      SchedulerKind::kMaxWeight, SchedulerKind::kFairRr};

std::string_view to_string(SchedulerKind kind);
std::optional<SchedulerKind> parse_scheduler_kind(std::string_view name);

/// Coarse grid start, start+step, ... <= stop, merged with 0.15..0.20 step 0.005
/// when `fine_grid` is set. Sorted, duplicates removed.
std::vector<double> lambda2_grid(double start, double stop, double step, bool fine_grid);

struct PolicyOptions {
  RegimeRule regime_rule = RegimeRule::kBusyPeriod;
  double cycle_length = 100.0;
  /// Defaults to wrr_weights() of the configuration.
  std::optional<std::array<unsigned, 2>> wrr_weights;
  /// Use this alpha for the proposed scheduler instead of solving for it.
  std::optional<double> alpha;
};

struct ResolvedPolicy {
  SchedulerPolicy policy;
  std::optional<double> alpha_star;
};

/// Concrete policy for `kind` at configuration `cfg` (solves alpha for the proposed scheduler).
ResolvedPolicy resolve_policy(SchedulerKind kind, const SystemConfig& cfg, const PolicyOptions& options = {});

struct SweepSpec {
  SystemConfig base;
  std::vector<double> lambda2_grid;
  std::vector<SchedulerKind> schedulers{kAllSchedulers.begin(), kAllSchedulers.end()};
  std::size_t replications = 20;
  std::uint64_t master_seed = 1;
  double horizon = 2e6;
  double warmup_fraction = 0.1;
  unsigned jobs = 1;
  PolicyOptions policy_options;
};

struct SweepRow {
  double lambda2 = 0.0;
  std::string scheduler;
  std::optional<double> alpha_star;
  /// Analytic mean delays where a closed form exists (proposed and pure priorities).
  std::optional<double> analytic_l1;
  std::optional<double> analytic_l2;
  std::array<Estimate, 2> sim_delay;
  std::array<Estimate, 2> sim_variance;
  /// Utilities at the replicate-averaged mean delays.
  double utility1 = 0.0;
  double utility2 = 0.0;
  double log_v = 0.0;
  /// 95% half-width of log V across replicates.
  double log_v_ci = 0.0;
  std::size_t replications = 0;
  std::uint64_t master_seed = 0;
  std::vector<SimMetrics> runs;
};

struct SkippedPoint {
  double lambda2 = 0.0;
  std::string reason;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ordered by (lambda2, scheduler order in the spec)
  std::vector<SkippedPoint> skipped;

  const SweepRow* find(double lambda2, SchedulerKind kind) const;
};

struct PointSpec {
  std::size_t replications = 20;
  std::uint64_t master_seed = 1;
  double horizon = 2e6;
  double warmup_fraction = 0.1;
  unsigned jobs = 1;
  PolicyOptions policy_options;
};

/// Replicated simulation of one scheduler at `cfg`; the row a sweep over the
/// single point cfg.class2.lambda would produce. Errors propagate.
SweepRow simulate_point(const SystemConfig& cfg, SchedulerKind kind, const PointSpec& spec);

/// Simulates every (lambda2, scheduler) pair with common random numbers
/// across schedulers. Unstable grid points are skipped with a reason.
SweepResult run_sweep(const SweepSpec& spec);

/// log V of one replicate from its mean delays.
double replicate_log_v(const SystemConfig& cfg, const SimMetrics& run);

enum class CsvLayout {
  kPerReplicate,  // one row per replicate; CI columns carry the group half-width
  kAggregate,     // one row per (lambda2, scheduler)
};

inline constexpr std::string_view kCsvHeader =
    "lambda2,scheduler,alpha_star,analytic_l1,analytic_l2,sim_l1,sim_l1_ci,sim_l2,sim_l2_ci,"
    "var_l1,var_l2,U1,U2,logV,replications,master_seed";

void write_csv(std::ostream& out, const SweepResult& result, const SystemConfig& base,
               CsvLayout layout = CsvLayout::kPerReplicate);

struct ValidationOptions {
  double tolerance = 0.02;  // relative
  double horizon = 2e6;
  double warmup_fraction = 0.1;
  std::uint64_t seed = 1;
};

struct ValidationEntry {
  std::string label;  // "l11", "l12", "l21", "l22"
  ClassId of = ClassId::kOne;
  ClassId priority = ClassId::kOne;
  double analytic = 0.0;
  double simulated = 0.0;
  double relative_error = 0.0;
  bool applicable = true;
  bool passed = true;
};

struct ValidationReport {
  /// Set when the configuration cannot be validated at all (e.g. unstable).
  std::optional<std::string> error;
  double tolerance = 0.0;
  std::vector<ValidationEntry> entries;

  bool passed() const;
};

/// Simulates both pure-priority systems and compares all four mean delays to
/// the closed-form table. Never throws for model errors; they become report content.
ValidationReport validate(const SystemConfig& cfg, const ValidationOptions& options);

}  // namespace delaysched
