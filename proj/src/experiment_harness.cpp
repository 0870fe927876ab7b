#include "delaysched/experiment_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <stdexcept>

#include "delaysched/errors.hpp"
#include "delaysched/mg1_analytics.hpp"
#include "delaysched/optimal_alpha.hpp"
#include "delaysched/rng.hpp"

namespace delaysched {
namespace {

double snap(double x) { return std::round(x * 1e9) / 1e9; }

std::string number(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string number(const std::optional<double>& x) { return x ? number(*x) : std::string(); }

struct Task {
  std::size_t row;
  std::size_t replicate;
};

}  // namespace

std::string_view to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::kProposed: return "proposed";
    case SchedulerKind::kPriority1: return "priority1";
    case SchedulerKind::kPriority2: return "priority2";
    case SchedulerKind::kWrr: return "wrr";
    case SchedulerKind::kMaxWeight: return "max_weight";
    case SchedulerKind::kFairRr: return "fair_rr";
  }
  return "unknown";
}

std::optional<SchedulerKind> parse_scheduler_kind(std::string_view name) {
  for (SchedulerKind kind : kAllSchedulers)
    if (to_string(kind) == name) return kind;
  return std::nullopt;
}

std::vector<double> lambda2_grid(double start, double stop, double step, bool fine_grid) {
  if (!(step > 0.0)) throw std::invalid_argument("lambda2_step must be > 0");
  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    const double x = snap(start + static_cast<double>(k) * step);
    if (x > stop + 1e-9) break;
    grid.push_back(x);
  }
  if (fine_grid)
    for (std::size_t k = 0; k <= 10; ++k) grid.push_back(snap(0.15 + 0.005 * static_cast<double>(k)));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

ResolvedPolicy resolve_policy(SchedulerKind kind, const SystemConfig& cfg, const PolicyOptions& options) {
  switch (kind) {
    case SchedulerKind::kProposed: {
      const double alpha = options.alpha ? *options.alpha : solve_alpha(cfg).alpha;
      return {TimeShared{alpha, options.regime_rule, options.cycle_length}, alpha};
    }
    case SchedulerKind::kPriority1: return {PriorityTo{ClassId::kOne}, std::nullopt};
    case SchedulerKind::kPriority2: return {PriorityTo{ClassId::kTwo}, std::nullopt};
    case SchedulerKind::kWrr:
      return {WeightedRoundRobin{options.wrr_weights.value_or(wrr_weights(cfg))}, std::nullopt};
    case SchedulerKind::kMaxWeight: return {MaxWeight{}, std::nullopt};
    case SchedulerKind::kFairRr: return {FairRoundRobin{}, std::nullopt};
  }
  throw std::invalid_argument("unknown scheduler kind");
}

const SweepRow* SweepResult::find(double lambda2, SchedulerKind kind) const {
  for (const SweepRow& row : rows)
    if (std::abs(row.lambda2 - lambda2) < 1e-9 && row.scheduler == to_string(kind)) return &row;
  return nullptr;
}

double replicate_log_v(const SystemConfig& cfg, const SimMetrics& run) {
  double value = 0.0;
  for (ClassId id : kClasses) {
    const double delay = run.of(id).mean_sojourn;
    if (std::isnan(delay)) return std::numeric_limits<double>::quiet_NaN();
    value += cfg.of(id).weight * log_utility(cfg.of(id).curve, delay);
  }
  return value;
}

namespace {

struct PreparedRow {
  SweepRow row;
  SimRunSpec run_spec;
};

PreparedRow prepare_row(const SystemConfig& cfg, double lambda2, SchedulerKind kind, const PolicyOptions& options,
                        const PriorityDelayTable& table, std::size_t replications, std::uint64_t master_seed,
                        double horizon, double warmup_fraction) {
  const ResolvedPolicy resolved = resolve_policy(kind, cfg, options);
  SweepRow row;
  row.lambda2 = lambda2;
  row.scheduler = std::string(to_string(kind));
  row.alpha_star = resolved.alpha_star;
  if (kind == SchedulerKind::kProposed) {
    const BlendedDelays blended = blended_delay(table, *resolved.alpha_star);
    row.analytic_l1 = blended.class1;
    row.analytic_l2 = blended.class2;
  } else if (kind == SchedulerKind::kPriority1 || kind == SchedulerKind::kPriority2) {
    const ClassId favored = kind == SchedulerKind::kPriority1 ? ClassId::kOne : ClassId::kTwo;
    row.analytic_l1 = table.delay(ClassId::kOne, favored);
    row.analytic_l2 = table.delay(ClassId::kTwo, favored);
  }
  row.replications = replications;
  row.master_seed = master_seed;
  row.runs.resize(replications);
  SimRunSpec run_spec;
  run_spec.config = cfg;
  run_spec.policy = resolved.policy;
  run_spec.horizon = horizon;
  run_spec.warmup_fraction = warmup_fraction;
  return {std::move(row), std::move(run_spec)};
}

void summarize_row(SweepRow& row, const SystemConfig& cfg) {
  std::vector<double> values(row.runs.size());
  for (ClassId id : kClasses) {
    const std::size_t i = index_of(id);
    for (std::size_t k = 0; k < row.runs.size(); ++k) values[k] = row.runs[k].classes[i].mean_sojourn;
    row.sim_delay[i] = estimate(values);
    for (std::size_t k = 0; k < row.runs.size(); ++k) values[k] = row.runs[k].classes[i].sojourn_variance;
    row.sim_variance[i] = estimate(values);
  }
  const auto class_utility = [&](ClassId id) {
    const double d = row.sim_delay[index_of(id)].mean;
    return std::isnan(d) ? d : utility(cfg.of(id).curve, d);
  };
  row.utility1 = class_utility(ClassId::kOne);
  row.utility2 = class_utility(ClassId::kTwo);
  const double d1 = row.sim_delay[0].mean;
  const double d2 = row.sim_delay[1].mean;
  row.log_v = (std::isnan(d1) || std::isnan(d2))
                  ? std::numeric_limits<double>::quiet_NaN()
                  : cfg.of(ClassId::kOne).weight * log_utility(cfg.of(ClassId::kOne).curve, d1) +
                        cfg.of(ClassId::kTwo).weight * log_utility(cfg.of(ClassId::kTwo).curve, d2);
  for (std::size_t k = 0; k < row.runs.size(); ++k) values[k] = replicate_log_v(cfg, row.runs[k]);
  row.log_v_ci = estimate(values).ci_half_width;
}

// Replicate k of every row uses replicate_seed(master_seed, k): common random
// numbers, so all schedulers at a grid point see the same arrivals.
void simulate_rows(std::vector<PreparedRow>& prepared, std::uint64_t master_seed, unsigned jobs) {
  std::vector<Task> tasks;
  for (std::size_t r = 0; r < prepared.size(); ++r)
    for (std::size_t k = 0; k < prepared[r].row.runs.size(); ++k) tasks.push_back({r, k});
  parallel_for(tasks.size(), jobs, [&](std::size_t t) {
    const Task& task = tasks[t];
    SimRunSpec run_spec = prepared[task.row].run_spec;
    run_spec.seed = replicate_seed(master_seed, task.replicate);
    prepared[task.row].row.runs[task.replicate] = run(run_spec);
  });
  for (PreparedRow& p : prepared) summarize_row(p.row, p.run_spec.config);
}

}  // namespace

SweepRow simulate_point(const SystemConfig& cfg, SchedulerKind kind, const PointSpec& spec) {
  cfg.validate();
  if (spec.replications == 0) throw std::invalid_argument("replications must be >= 1");
  const PriorityDelayTable table = delay_table(cfg);
  PolicyOptions options = spec.policy_options;
  if (!options.wrr_weights) options.wrr_weights = wrr_weights(cfg);
  std::vector<PreparedRow> prepared;
  prepared.push_back(prepare_row(cfg, cfg.of(ClassId::kTwo).arrival_rate, kind, options, table, spec.replications,
                                 spec.master_seed, spec.horizon, spec.warmup_fraction));
  simulate_rows(prepared, spec.master_seed, spec.jobs);
  return std::move(prepared.front().row);
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.base.validate();
  if (spec.replications == 0) throw std::invalid_argument("replications must be >= 1");

  // WRR weights come from the base configuration; the rule does not involve arrival rates.
  PolicyOptions options = spec.policy_options;
  if (!options.wrr_weights) options.wrr_weights = wrr_weights(spec.base);

  SweepResult result;
  std::vector<PreparedRow> prepared;
  for (double lambda2 : spec.lambda2_grid) {
    const SystemConfig cfg = spec.base.with_arrival_rate(ClassId::kTwo, lambda2);
    std::vector<PreparedRow> point;
    try {
      const PriorityDelayTable table = delay_table(cfg);
      for (SchedulerKind kind : spec.schedulers)
        point.push_back(prepare_row(cfg, lambda2, kind, options, table, spec.replications, spec.master_seed,
                                    spec.horizon, spec.warmup_fraction));
    } catch (const std::exception& e) {
      result.skipped.push_back({lambda2, e.what()});
      continue;
    }
    for (PreparedRow& p : point) prepared.push_back(std::move(p));
  }
  simulate_rows(prepared, spec.master_seed, spec.jobs);
  for (PreparedRow& p : prepared) result.rows.push_back(std::move(p.row));
  return result;
}

void write_csv(std::ostream& out, const SweepResult& result, const SystemConfig& base, CsvLayout layout) {
  out << kCsvHeader << '\n';
  for (const SweepRow& row : result.rows) {
    const std::string prefix = number(row.lambda2) + ',' + row.scheduler + ',' + number(row.alpha_star) + ',' +
                               number(row.analytic_l1) + ',' + number(row.analytic_l2) + ',';
    const std::string suffix = ',' + std::to_string(row.replications) + ',' + std::to_string(row.master_seed);
    if (layout == CsvLayout::kAggregate) {
      out << prefix << number(row.sim_delay[0].mean) << ',' << number(row.sim_delay[0].ci_half_width) << ','
          << number(row.sim_delay[1].mean) << ',' << number(row.sim_delay[1].ci_half_width) << ','
          << number(row.sim_variance[0].mean) << ',' << number(row.sim_variance[1].mean) << ','
          << number(row.utility1) << ',' << number(row.utility2) << ',' << number(row.log_v) << suffix << '\n';
      continue;
    }
    const SystemConfig cfg = base.with_arrival_rate(ClassId::kTwo, row.lambda2);
    for (const SimMetrics& m : row.runs) {
      const double l1 = m.of(ClassId::kOne).mean_sojourn;
      const double l2 = m.of(ClassId::kTwo).mean_sojourn;
      const double u1 = std::isnan(l1) ? l1 : utility(cfg.of(ClassId::kOne).curve, l1);
      const double u2 = std::isnan(l2) ? l2 : utility(cfg.of(ClassId::kTwo).curve, l2);
      out << prefix << number(l1) << ',' << number(row.sim_delay[0].ci_half_width) << ',' << number(l2) << ','
          << number(row.sim_delay[1].ci_half_width) << ',' << number(m.of(ClassId::kOne).sojourn_variance) << ','
          << number(m.of(ClassId::kTwo).sojourn_variance) << ',' << number(u1) << ',' << number(u2) << ','
          << number(replicate_log_v(cfg, m)) << suffix << '\n';
    }
  }
}

bool ValidationReport::passed() const {
  if (error) return false;
  return std::all_of(entries.begin(), entries.end(), [](const ValidationEntry& e) { return !e.applicable || e.passed; });
}

ValidationReport validate(const SystemConfig& cfg, const ValidationOptions& options) {
  ValidationReport report;
  report.tolerance = options.tolerance;
  try {
    cfg.validate();
    const PriorityDelayTable table = delay_table(cfg);
    for (ClassId favored : kClasses) {
      SimRunSpec spec;
      spec.config = cfg;
      spec.policy = PriorityTo{favored};
      spec.horizon = options.horizon;
      spec.warmup_fraction = options.warmup_fraction;
      spec.seed = options.seed;
      const SimMetrics m = run(spec);
      for (ClassId of : kClasses) {
        ValidationEntry entry;
        entry.label = "l" + std::to_string(number_of(of)) + std::to_string(number_of(favored));
        entry.of = of;
        entry.priority = favored;
        entry.analytic = table.delay(of, favored);
        entry.simulated = m.of(of).mean_sojourn;
        entry.applicable = cfg.of(of).arrival_rate > 0.0 && m.of(of).served > 0;
        if (entry.applicable) {
          entry.relative_error = std::abs(entry.simulated - entry.analytic) / entry.analytic;
          entry.passed = entry.relative_error <= options.tolerance;
        }
        report.entries.push_back(entry);
      }
    }
    std::sort(report.entries.begin(), report.entries.end(),
              [](const ValidationEntry& a, const ValidationEntry& b) { return a.label < b.label; });
  } catch (const std::exception& e) {
    report.error = e.what();
  }
  return report;
}

}  // namespace delaysched
