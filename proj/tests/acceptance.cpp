// Acceptance checks. Usage: acceptance [A1 ... A8]; no argument runs all.
// Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "delaysched/des_engine.hpp"
#include "delaysched/experiment_harness.hpp"
#include "delaysched/mg1_analytics.hpp"
#include "delaysched/optimal_alpha.hpp"
#include "delaysched/scheduler_zoo.hpp"
#include "test_support.hpp"

using namespace delaysched;
using testing::reference_config;

namespace {

struct Outcome {
  bool passed = true;
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void fail(const std::string& why) {
    passed = false;
    failures.push_back(why);
  }
  void note(const std::string& what) { notes.push_back(what); }

  std::string detail() const {
    std::string text;
    for (const auto* list : {&notes, &failures})
      for (const std::string& item : *list) text += (text.empty() ? "" : "; ") + item;
    return text;
  }
};

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

SimRunSpec spec_for(const SystemConfig& cfg, SchedulerPolicy policy, double horizon, std::uint64_t seed) {
  SimRunSpec s;
  s.config = cfg;
  s.policy = policy;
  s.horizon = horizon;
  s.seed = seed;
  return s;
}

std::vector<double> sweep_grid() { return lambda2_grid(0.01, 0.46, 0.025, true); }

// Pure-priority simulations at the reference load against the closed-form table, 2%.
Outcome a1() {
  Outcome r;
  const SystemConfig cfg = reference_config(0.4, 0.2);
  const PriorityDelayTable table = delay_table(cfg);
  const double horizon = std::max(2e6, horizon_for_departures(cfg, 1e6, 0.1) * 1.01);
  double worst = 0.0;
  for (ClassId favored : kClasses) {
    const SimMetrics m = run(spec_for(cfg, PriorityTo{favored}, horizon, 101));
    const std::uint64_t departures = m.classes[0].served + m.classes[1].served;
    if (departures < 1000000) r.fail(fmt("only %llu departures", static_cast<unsigned long long>(departures)));
    for (ClassId id : kClasses) {
      const double want = table.delay(id, favored);
      const double err = rel(m.of(id).mean_sojourn, want);
      worst = std::max(worst, err);
      if (err > 0.02)
        r.fail(fmt("l%d%d sim %.5f vs %.5f (%.2f%%)", number_of(id), number_of(favored), m.of(id).mean_sojourn, want,
                   100 * err));
    }
  }
  r.note(fmt("max rel err %.3f%%", 100 * worst));
  return r;
}

// Time-shared delays against the blend of simulated pure-priority delays, 3%.
Outcome a2() {
  Outcome r;
  const SystemConfig cfg = reference_config(0.4, 0.2);
  const double horizon = 2e6;
  const SimMetrics p1 = run(spec_for(cfg, PriorityTo{ClassId::kOne}, horizon, 202));
  const SimMetrics p2 = run(spec_for(cfg, PriorityTo{ClassId::kTwo}, horizon, 202));
  double worst = 0.0;
  for (double alpha : {0.25, 0.5, 0.75}) {
    const SimMetrics ts = run(spec_for(cfg, TimeShared{alpha}, horizon, 202));
    for (ClassId id : kClasses) {
      const double want = alpha * p1.of(id).mean_sojourn + (1 - alpha) * p2.of(id).mean_sojourn;
      const double err = rel(ts.of(id).mean_sojourn, want);
      worst = std::max(worst, err);
      if (err > 0.03)
        r.fail(fmt("alpha %.2f class %d: %.5f vs blend %.5f", alpha, number_of(id), ts.of(id).mean_sojourn, want));
    }
  }
  r.note(fmt("max rel err %.3f%%", 100 * worst));
  return r;
}

// Second differences of log V over alpha on 101 points, 20 random stable configs.
Outcome a3() {
  Outcome r;
  std::mt19937_64 rng(303);
  double largest = -INFINITY;
  for (int i = 0; i < 20; ++i) {
    const SystemConfig cfg = testing::random_stable_config(rng);
    try {
      std::vector<double> v(101);
      for (int k = 0; k <= 100; ++k) v[k] = log_system_utility(cfg, k / 100.0);
      for (int k = 1; k < 100; ++k) {
        const double d2 = v[k + 1] - 2 * v[k] + v[k - 1];
        largest = std::max(largest, d2);
        if (d2 > 1e-8) r.fail(fmt("config %d alpha %.2f second difference %.3g", i, k / 100.0, d2));
      }
      (void)solve_alpha(cfg);
    } catch (const std::exception& e) {
      r.fail(fmt("config %d threw: %s", i, e.what()));
    }
  }
  r.note(fmt("largest second difference %.3g", largest));
  return r;
}

// Solver against a 1001-point grid argmax over the sweep, tolerance 0.002.
Outcome a4() {
  Outcome r;
  double worst = 0.0;
  int interior = 0, zero = 0, one = 0;
  for (double lambda2 : sweep_grid()) {
    const SystemConfig cfg = reference_config(0.4, lambda2);
    const AlphaSolution s = solve_alpha(cfg);
    double best = -INFINITY, arg = 0.0;
    for (int k = 0; k <= 1000; ++k) {
      const double v = log_system_utility(cfg, k / 1000.0);
      if (v > best) {
        best = v;
        arg = k / 1000.0;
      }
    }
    worst = std::max(worst, std::abs(s.alpha - arg));
    if (std::abs(s.alpha - arg) > 0.002) r.fail(fmt("lambda2 %.3f alpha* %.6f grid %.3f", lambda2, s.alpha, arg));
    interior += s.branch == AlphaBranch::kInterior;
    zero += s.branch == AlphaBranch::kClampedZero;
    one += s.branch == AlphaBranch::kClampedOne;
  }
  if (solve_alpha(reference_config(0.4, 0.01)).alpha != 0.0) r.fail("alpha*(0.01) != 0");
  if (solve_alpha(reference_config(0.4, 0.46)).alpha != 1.0) r.fail("alpha*(0.46) != 1");
  if (zero == 0 || one == 0) r.fail("sweep does not exercise both clamped branches");
  r.note(fmt("max |diff| %.2g; branches interior=%d clamped-0=%d clamped-1=%d", worst, interior, zero, one));
  return r;
}

SweepResult dominance_sweep(const std::vector<double>& grid, std::vector<SchedulerKind> kinds, std::size_t reps,
                            double horizon) {
  SweepSpec spec;
  spec.base = reference_config(0.4, 0.2);
  spec.lambda2_grid = grid;
  spec.schedulers = std::move(kinds);
  spec.replications = reps;
  spec.horizon = horizon;
  spec.master_seed = 505;
  return run_sweep(spec);
}

// Proposed log V >= each baseline minus the baseline's 95% half-width at every
// point; the gap to wrr, fair_rr and max_weight widens from 0.2 to 0.46.
Outcome a5() {
  Outcome r;
  const std::vector<double> grid = sweep_grid();
  const SweepResult result = dominance_sweep(grid, {kAllSchedulers.begin(), kAllSchedulers.end()}, 10, 1e6);
  if (!result.skipped.empty()) r.fail("sweep skipped stable points");
  const std::vector<SchedulerKind> baselines{SchedulerKind::kPriority1, SchedulerKind::kPriority2,
                                             SchedulerKind::kWrr, SchedulerKind::kMaxWeight, SchedulerKind::kFairRr};
  double worst_margin = INFINITY;
  int comparisons = 0, below = 0;
  for (double lambda2 : grid) {
    const SweepRow* p = result.find(lambda2, SchedulerKind::kProposed);
    if (!p) continue;
    for (SchedulerKind kind : baselines) {
      const SweepRow* b = result.find(lambda2, kind);
      const double margin = p->log_v - (b->log_v - b->log_v_ci);
      worst_margin = std::min(worst_margin, margin);
      ++comparisons;
      below += margin < 0.0;
      if (margin < 0.0)
        r.fail(fmt("lambda2 %.3f: proposed %.5f < %s %.5f - %.5f", lambda2, p->log_v,
                   std::string(to_string(kind)).c_str(), b->log_v, b->log_v_ci));
    }
  }
  for (SchedulerKind kind : {SchedulerKind::kWrr, SchedulerKind::kFairRr, SchedulerKind::kMaxWeight}) {
    const auto gap = [&](double l2) {
      return result.find(l2, SchedulerKind::kProposed)->log_v - result.find(l2, kind)->log_v;
    };
    const double g20 = gap(0.2), g46 = gap(0.46);
    r.note(fmt("gap vs %s %.5f -> %.5f", std::string(to_string(kind)).c_str(), g20, g46));
    if (!(g46 > g20)) r.fail(fmt("gap vs %s does not widen", std::string(to_string(kind)).c_str()));
  }
  r.note(fmt("worst margin %.5f; %d of %d comparisons below", worst_margin, below, comparisons));
  return r;
}

// Delay variance on the high-load part of the sweep.
Outcome a6() {
  Outcome r;
  std::vector<double> grid;
  for (double x : sweep_grid())
    if (x >= 0.3 - 1e-9 && x <= 0.46 + 1e-9) grid.push_back(x);
  const SweepResult result =
      dominance_sweep(grid, {SchedulerKind::kProposed, SchedulerKind::kPriority1}, 10, 1e6);
  double lo = INFINITY, hi = -INFINITY;
  for (double lambda2 : grid) {
    const SweepRow* p = result.find(lambda2, SchedulerKind::kProposed);
    const SweepRow* p1 = result.find(lambda2, SchedulerKind::kPriority1);
    const double v1 = p->sim_variance[0].mean, v2 = p->sim_variance[1].mean;
    if (rel(v1, p1->sim_variance[0].mean) > 0.05)
      r.fail(fmt("lambda2 %.3f class-1 variance %.5f vs priority1 %.5f", lambda2, v1, p1->sim_variance[0].mean));
    if (!(v2 > v1)) r.fail(fmt("lambda2 %.3f class-2 variance %.5f <= class-1 %.5f", lambda2, v2, v1));
    lo = std::min(lo, v1);
    hi = std::max(hi, v1);
  }
  if (hi / lo > 1.25) r.fail(fmt("class-1 variance ranges %.5f..%.5f", lo, hi));
  r.note(fmt("%zu points, class-1 variance %.5f..%.5f", grid.size(), lo, hi));
  return r;
}

// Little's law within 1%, no work-conservation failure, exact per-packet work,
// bit-identical CSV for identical seeds.
Outcome a7() {
  Outcome r;
  const SystemConfig cfg = reference_config(0.4, 0.35);
  const std::vector<SchedulerPolicy> policies{PriorityTo{ClassId::kOne}, PriorityTo{ClassId::kTwo},
                                              TimeShared{*resolve_policy(SchedulerKind::kProposed, cfg).alpha_star},
                                              TimeShared{0.5}, TimeShared{0.5, RegimeRule::kFixedCycle, 100.0},
                                              WeightedRoundRobin{wrr_weights(cfg)}, MaxWeight{}, FairRoundRobin{}};
  double worst_little = 0.0, worst_work = 0.0;
  for (const SchedulerPolicy& policy : policies) {
    try {
      const SimMetrics m = run(spec_for(cfg, policy, 1e6, 707));
      for (ClassId id : kClasses) {
        const double lambda_hat = static_cast<double>(m.of(id).arrivals) / (m.horizon - m.warmup);
        const double err = rel(m.of(id).mean_in_system, lambda_hat * m.of(id).mean_sojourn);
        worst_little = std::max(worst_little, err);
        if (err > 0.01) r.fail(fmt("%s class %d Little error %.3f%%", policy_name(policy).c_str(), number_of(id), 100 * err));
      }
      worst_work = std::max(worst_work, m.max_work_error);
      if (m.max_work_error > 1e-12) r.fail(fmt("%s work error %.3g", policy_name(policy).c_str(), m.max_work_error));
      if (m.fifo_violations != 0) r.fail(policy_name(policy) + " reordered packets within a class");
    } catch (const std::logic_error& e) {
      r.fail(policy_name(policy) + " work conservation: " + e.what());
    }
  }
  std::string first, second;
  for (std::string* text : {&first, &second}) {
    std::ostringstream out;
    SweepSpec spec;
    spec.base = reference_config(0.4, 0.2);
    spec.lambda2_grid = {0.1, 0.3};
    spec.replications = 3;
    spec.horizon = 2e4;
    spec.master_seed = 777;
    spec.jobs = text == &first ? 1 : 4;
    write_csv(out, run_sweep(spec), spec.base);
    *text = out.str();
  }
  if (first != second) r.fail("CSV differs between identical runs");
  r.note(fmt("Little max %.3f%%, work max %.2g, CSV identical", 100 * worst_little, worst_work));
  return r;
}

Outcome a8() {
  Outcome r;
  const auto w = wrr_weights(reference_config());
  if (w[0] != 111 || w[1] != 43) r.fail(fmt("weights (%u, %u)", w[0], w[1]));
  r.note(fmt("weights (%u, %u)", w[0], w[1]));
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<Outcome()>> criteria{
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5}, {"A6", a6}, {"A7", a7}, {"A8", a8}};
  std::vector<std::string> selected(argv + 1, argv + argc);
  if (selected.empty())
    for (const auto& [name, _] : criteria) selected.push_back(name);
  bool all = true;
  for (const std::string& name : selected) {
    const auto it = criteria.find(name);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %s\n", name.c_str());
      return 2;
    }
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s %s  %s\n", name.c_str(), o.passed ? "PASS" : "FAIL", o.detail().c_str());
    std::fflush(stdout);
    all = all && o.passed;
  }
  return all ? 0 : 1;
}
