#include "delaysched/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "delaysched/config.hpp"
#include "delaysched/errors.hpp"
#include "delaysched/experiment_harness.hpp"
#include "delaysched/mg1_analytics.hpp"
#include "delaysched/optimal_alpha.hpp"
#include "delaysched/rng.hpp"

namespace delaysched {
namespace {

struct GlobalOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_path;
  std::string format = "text";
  std::optional<std::uint64_t> seed;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string tolerance = "2%";
  std::string layout = "per-replicate";
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fixed(double x, int digits = 6) {
  if (std::isnan(x)) return "n/a";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits + 3, x);
  return buf;
}

class KeyValuePrinter {
 public:
  KeyValuePrinter(std::ostream& out, bool csv) : out_(out), csv_(csv) {
    if (csv_) out_ << "key,value\n";
  }
  void operator()(const std::string& key, const std::string& value) {
    if (csv_) out_ << key << ',' << value << '\n';
    else out_ << std::left << std::setw(18) << key << value << '\n';
  }
  void operator()(const std::string& key, double value) { (*this)(key, fixed(value)); }

 private:
  std::ostream& out_;
  bool csv_;
};

RunConfig load(const GlobalOptions& options) {
  if (options.config_path.empty()) throw UsageError("--config PATH is required");
  RunConfig config = load_config(options.config_path, options.overrides);
  if (options.seed) config.simulation.master_seed = *options.seed;
  return config;
}

bool csv_format(const GlobalOptions& options) {
  if (options.format == "csv") return true;
  if (options.format == "text") return false;
  throw UsageError("--format must be text or csv");
}

int cmd_solve(const GlobalOptions& options, std::ostream& out) {
  const RunConfig config = load(options);
  const SystemConfig& cfg = config.system;
  const bool csv = csv_format(options);
  const PriorityDelayTable table = delay_table(cfg);
  const AlphaSolution solution = solve_alpha(cfg);

  KeyValuePrinter print(out, csv);
  print("alpha_star", solution.alpha);
  print("branch", std::string(to_string(solution.branch)));
  print("log_v", solution.log_utility);
  print("z_prime_0", solution.slope_at_zero);
  print("z_prime_1", solution.slope_at_one);
  try {
    const OptimalityConstants k = optimality_constants(cfg, table);
    print("theta", k.gain_ratio);
    print("phi", k.offset);
    print("phi11", k.sensitive_scale);
    print("phi12", k.sensitive_rate);
    print("phi21", k.tolerant_scale);
    print("phi22", k.tolerant_rate);
  } catch (const DegenerateGapError&) {
    for (const char* key : {"theta", "phi", "phi11", "phi12", "phi21", "phi22"}) print(key, "n/a");
  }
  print("l11", table.class1_prioritized);
  print("l12", table.class1_deferred);
  print("l21", table.class2_deferred);
  print("l22", table.class2_prioritized);
  print("rho1", cfg.utilization(ClassId::kOne));
  print("rho2", cfg.utilization(ClassId::kTwo));
  return kExitSuccess;
}

PointSpec point_spec(const RunConfig& config, const GlobalOptions& options) {
  PointSpec spec;
  spec.replications = config.simulation.replications;
  spec.master_seed = config.simulation.master_seed;
  spec.horizon = config.simulation.horizon;
  spec.warmup_fraction = config.simulation.warmup_fraction;
  spec.jobs = options.jobs;
  spec.policy_options = policy_options(config);
  return spec;
}

CsvLayout csv_layout(const GlobalOptions& options) {
  if (options.layout == "per-replicate") return CsvLayout::kPerReplicate;
  if (options.layout == "aggregate") return CsvLayout::kAggregate;
  throw UsageError("--layout must be per-replicate or aggregate");
}

void write_file(const std::string& path, const SweepResult& result, const SystemConfig& base, CsvLayout layout) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw UsageError("cannot write output file " + path);
  write_csv(file, result, base, layout);
  if (!file.flush()) throw UsageError("failed writing output file " + path);
}

int cmd_simulate(const GlobalOptions& options, std::ostream& out) {
  const RunConfig config = load(options);
  const SystemConfig& cfg = config.system;
  const bool csv = csv_format(options);
  const CsvLayout layout = csv_layout(options);
  if (!(cfg.of(ClassId::kOne).arrival_rate + cfg.of(ClassId::kTwo).arrival_rate > 0.0))
    throw InsufficientDataError("no arrivals configured; nothing to measure");

  SweepResult result;
  result.rows.push_back(simulate_point(cfg, config.scheduler.variant, point_spec(config, options)));
  const SweepRow& row = result.rows.front();

  if (!options.out_path.empty()) write_file(options.out_path, result, cfg, layout);
  if (csv) {
    write_csv(out, result, cfg, layout);
    return kExitSuccess;
  }
  KeyValuePrinter print(out, false);
  print("scheduler", row.scheduler);
  if (row.alpha_star) print("alpha_star", *row.alpha_star);
  print("replications", std::to_string(row.replications));
  print("master_seed", std::to_string(row.master_seed));
  print("rng", std::string(kRngAlgorithm));
  print("horizon", config.simulation.horizon);
  print("warmup_fraction", config.simulation.warmup_fraction);
  for (ClassId id : kClasses) {
    const std::size_t i = index_of(id);
    const std::string c = "class" + std::to_string(number_of(id)) + ".";
    std::uint64_t served = 0;
    std::vector<double> in_system;
    for (const SimMetrics& m : row.runs) {
      served += m.classes[i].served;
      in_system.push_back(m.classes[i].mean_in_system);
    }
    print(c + "served", std::to_string(served));
    print(c + "mean_delay", row.sim_delay[i].mean);
    print(c + "mean_delay_ci", row.sim_delay[i].ci_half_width);
    print(c + "delay_var", row.sim_variance[i].mean);
    print(c + "in_system", estimate(in_system).mean);
    const std::optional<double>& analytic = i == 0 ? row.analytic_l1 : row.analytic_l2;
    if (analytic) print(c + "analytic_delay", *analytic);
  }
  std::vector<double> busy;
  for (const SimMetrics& m : row.runs) busy.push_back(m.busy_fraction);
  print("busy_fraction", estimate(busy).mean);
  print("U1", row.utility1);
  print("U2", row.utility2);
  print("log_v", row.log_v);
  print("log_v_ci", row.log_v_ci);
  return kExitSuccess;
}

int cmd_sweep(const GlobalOptions& options, std::ostream& out, std::ostream& err) {
  const RunConfig config = load(options);
  if (options.out_path.empty()) throw UsageError("sweep needs --out PATH");
  const CsvLayout layout = csv_layout(options);
  const std::string probe_path = options.out_path;
  {
    std::ofstream probe(probe_path, std::ios::app);
    if (!probe) throw UsageError("cannot write output file " + probe_path);
  }

  SweepSpec spec;
  spec.base = config.system;
  spec.lambda2_grid = lambda2_grid(config.sweep.lambda2_start, config.sweep.lambda2_stop,
                                   config.sweep.lambda2_step, config.sweep.fine_grid);
  spec.replications = config.simulation.replications;
  spec.master_seed = config.simulation.master_seed;
  spec.horizon = config.simulation.horizon;
  spec.warmup_fraction = config.simulation.warmup_fraction;
  spec.jobs = options.jobs;
  spec.policy_options = policy_options(config);

  const SweepResult result = run_sweep(spec);
  for (const SkippedPoint& s : result.skipped) err << "skipped lambda2=" << s.lambda2 << ": " << s.reason << '\n';
  write_file(options.out_path, result, spec.base, layout);
  out << "wrote " << result.rows.size() << " (lambda2, scheduler) groups to " << options.out_path << '\n';
  return kExitSuccess;
}

double parse_tolerance(const std::string& text) {
  std::string body = text;
  double scale = 1.0;
  if (!body.empty() && body.back() == '%') {
    body.pop_back();
    scale = 0.01;
  }
  std::size_t used = 0;
  double value = -1.0;
  try {
    value = std::stod(body, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != body.size() || !(value >= 0.0)) throw UsageError("invalid --tolerance '" + text + "'");
  return value * scale;
}

int cmd_validate(const GlobalOptions& options, std::ostream& out) {
  const RunConfig config = load(options);
  const double tolerance = parse_tolerance(options.tolerance);
  ValidationOptions vo;
  vo.tolerance = tolerance;
  vo.horizon = config.simulation.horizon;
  vo.warmup_fraction = config.simulation.warmup_fraction;
  vo.seed = config.simulation.master_seed;
  const ValidationReport report = validate(config.system, vo);

  out << "validation of pure-priority delays, tolerance " << fixed(100.0 * tolerance) << "%\n";
  if (report.error) {
    out << "error: " << *report.error << "\nresult: FAIL\n";
    return kExitFailure;
  }
  for (const ValidationEntry& e : report.entries) {
    out << e.label << "  analytic " << fixed(e.analytic) << "  simulated " << fixed(e.simulated);
    if (!e.applicable) {
      out << "  n/a\n";
      continue;
    }
    out << "  rel_err " << fixed(100.0 * e.relative_error) << "%  " << (e.passed ? "PASS" : "FAIL") << '\n';
  }
  const bool ok = report.passed();
  out << "result: " << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? kExitSuccess : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  GlobalOptions options;
  CLI::App app{"Delay-optimal time-shared priority scheduling for two traffic classes"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", options.config_path, "Configuration file");
  app.add_option("--set", options.overrides, "Override a key: section.key=value (repeatable)");
  app.add_option("--out", options.out_path, "Output CSV path");
  app.add_option("--format", options.format, "Output format: text or csv");
  app.add_option("--seed", options.seed, "Master seed (overrides simulation.master_seed)");
  app.add_option("--jobs", options.jobs, "Worker threads for replications")->check(CLI::PositiveNumber);

  CLI::App* solve = app.add_subcommand("solve", "Compute the optimal time-sharing fraction");
  CLI::App* simulate = app.add_subcommand("simulate", "Simulate the configured scheduler");
  CLI::App* sweep = app.add_subcommand("sweep", "Sweep lambda2 over all schedulers and write CSV");
  CLI::App* validate_cmd = app.add_subcommand("validate", "Compare pure-priority simulations to closed forms");
  for (CLI::App* sub : {simulate, sweep})
    sub->add_option("--layout", options.layout, "CSV rows: per-replicate or aggregate");
  validate_cmd->add_option("--tolerance", options.tolerance, "Relative tolerance, e.g. 0.02 or 2%");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(options, out);
    if (simulate->parsed()) return cmd_simulate(options, out);
    if (sweep->parsed()) return cmd_sweep(options, out, err);
    return cmd_validate(options, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnstableSystemError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace delaysched
