#include "delaysched/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "delaysched/errors.hpp"

namespace delaysched {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"system", {"server_rate"}},
      {"class1", {"lambda", "size", "a", "b", "beta", "second_moment"}},
      {"class2", {"lambda", "size", "a", "b", "beta", "second_moment"}},
      {"simulation", {"horizon", "warmup_fraction", "replications", "master_seed"}},
      {"scheduler", {"variant", "alpha", "regime", "cycle_length", "w1", "w2"}},
      {"sweep", {"lambda2_start", "lambda2_stop", "lambda2_step", "fine_grid"}},
  };
  return keys;
}

void check_keys(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (!body.data().empty()) throw ConfigError("key outside any section: " + section);
    if (it == schema().end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!value.empty()) throw ConfigError("nested key not allowed: " + section + "." + key);
      if (!it->second.contains(key)) throw ConfigError("unknown key " + section + "." + key);
    }
  }
}

std::optional<std::string> lookup(const pt::ptree& tree, const std::string& path) {
  if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return *v;
  return std::nullopt;
}

double to_double(const std::string& path, const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ConfigError(path + ": not a number: '" + text + "'");
  return value;
}

std::uint64_t to_unsigned(const std::string& path, const std::string& text) {
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    if (!text.empty() && text.front() != '-') value = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ConfigError(path + ": not a non-negative integer: '" + text + "'");
  return value;
}

bool to_bool(const std::string& path, const std::string& text) {
  if (text == "on" || text == "true" || text == "yes" || text == "1") return true;
  if (text == "off" || text == "false" || text == "no" || text == "0") return false;
  throw ConfigError(path + ": expected on/off: '" + text + "'");
}

double required_double(const pt::ptree& tree, const std::string& path) {
  const auto v = lookup(tree, path);
  if (!v) throw ConfigError("missing required key " + path);
  return to_double(path, *v);
}

template <class T, class Convert>
void optional_value(const pt::ptree& tree, const std::string& path, T& target, Convert convert) {
  if (const auto v = lookup(tree, path)) target = convert(path, *v);
}

ClassParams parse_class(const pt::ptree& tree, const std::string& section) {
  ClassParams p;
  p.arrival_rate = required_double(tree, section + ".lambda");
  p.packet_size = required_double(tree, section + ".size");
  p.curve.steepness = required_double(tree, section + ".a");
  p.curve.inflection = required_double(tree, section + ".b");
  p.weight = required_double(tree, section + ".beta");
  if (const auto v = lookup(tree, section + ".second_moment"))
    p.service_second_moment = to_double(section + ".second_moment", *v);
  return p;
}

std::string format(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

RunConfig from_tree(const pt::ptree& tree) {
  check_keys(tree);
  RunConfig config;
  config.system.server_rate = required_double(tree, "system.server_rate");
  config.system.classes[0] = parse_class(tree, "class1");
  config.system.classes[1] = parse_class(tree, "class2");

  SimulationSettings& sim = config.simulation;
  optional_value(tree, "simulation.horizon", sim.horizon, to_double);
  optional_value(tree, "simulation.warmup_fraction", sim.warmup_fraction, to_double);
  optional_value(tree, "simulation.replications", sim.replications, to_unsigned);
  optional_value(tree, "simulation.master_seed", sim.master_seed, to_unsigned);

  SchedulerSettings& sched = config.scheduler;
  if (const auto v = lookup(tree, "scheduler.variant")) {
    const auto kind = parse_scheduler_kind(*v);
    if (!kind) throw ConfigError("scheduler.variant: unknown scheduler '" + *v + "'");
    sched.variant = *kind;
  }
  if (const auto v = lookup(tree, "scheduler.alpha"); v && *v != "auto")
    sched.alpha = to_double("scheduler.alpha", *v);
  if (const auto v = lookup(tree, "scheduler.regime")) {
    if (*v == "busy_period") sched.regime = RegimeRule::kBusyPeriod;
    else if (*v == "fixed_cycle") sched.regime = RegimeRule::kFixedCycle;
    else throw ConfigError("scheduler.regime: expected busy_period or fixed_cycle: '" + *v + "'");
  }
  optional_value(tree, "scheduler.cycle_length", sched.cycle_length, to_double);
  const auto w1 = lookup(tree, "scheduler.w1");
  const auto w2 = lookup(tree, "scheduler.w2");
  if (w1.has_value() != w2.has_value()) throw ConfigError("scheduler.w1 and scheduler.w2 must be given together");
  if (w1) {
    sched.wrr_weights = std::array<unsigned, 2>{static_cast<unsigned>(to_unsigned("scheduler.w1", *w1)),
                                                static_cast<unsigned>(to_unsigned("scheduler.w2", *w2))};
  }

  SweepSettings& sweep = config.sweep;
  optional_value(tree, "sweep.lambda2_start", sweep.lambda2_start, to_double);
  optional_value(tree, "sweep.lambda2_stop", sweep.lambda2_stop, to_double);
  optional_value(tree, "sweep.lambda2_step", sweep.lambda2_step, to_double);
  optional_value(tree, "sweep.fine_grid", sweep.fine_grid, to_bool);

  try {
    config.system.validate();
    validate(SchedulerPolicy{TimeShared{sched.alpha.value_or(0.5), sched.regime, sched.cycle_length}});
    if (sched.wrr_weights) validate(SchedulerPolicy{WeightedRoundRobin{*sched.wrr_weights}});
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(sim.horizon > 0.0)) throw ConfigError("simulation.horizon must be > 0");
  if (!(sim.warmup_fraction >= 0.0 && sim.warmup_fraction < 0.5))
    throw ConfigError("simulation.warmup_fraction must lie in [0, 0.5)");
  if (sim.replications < 1) throw ConfigError("simulation.replications must be >= 1");
  if (!(sweep.lambda2_step > 0.0)) throw ConfigError("sweep.lambda2_step must be > 0");
  if (!(sweep.lambda2_start >= 0.0 && sweep.lambda2_stop >= sweep.lambda2_start))
    throw ConfigError("sweep: need 0 <= lambda2_start <= lambda2_stop");
  return config;
}

}  // namespace

RunConfig parse_config(std::string_view text, std::span<const std::string> overrides) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.what());
  }
  for (const std::string& assignment : overrides) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ConfigError("override must look like section.key=value: '" + assignment + "'");
    tree.put(pt::ptree::path_type(assignment.substr(0, eq), '.'), assignment.substr(eq + 1));
  }
  return from_tree(tree);
}

RunConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), overrides);
}

std::string serialize_config(const RunConfig& config) {
  std::ostringstream out;
  out << "[system]\nserver_rate = " << format(config.system.server_rate) << "\n";
  for (ClassId id : kClasses) {
    const ClassParams& p = config.system.of(id);
    out << "\n[class" << number_of(id) << "]\n"
        << "lambda = " << format(p.arrival_rate) << "\n"
        << "size = " << format(p.packet_size) << "\n"
        << "a = " << format(p.curve.steepness) << "\n"
        << "b = " << format(p.curve.inflection) << "\n"
        << "beta = " << format(p.weight) << "\n";
    if (p.service_second_moment) out << "second_moment = " << format(*p.service_second_moment) << "\n";
  }
  const SimulationSettings& sim = config.simulation;
  out << "\n[simulation]\n"
      << "horizon = " << format(sim.horizon) << "\n"
      << "warmup_fraction = " << format(sim.warmup_fraction) << "\n"
      << "replications = " << sim.replications << "\n"
      << "master_seed = " << sim.master_seed << "\n";
  const SchedulerSettings& sched = config.scheduler;
  out << "\n[scheduler]\n"
      << "variant = " << to_string(sched.variant) << "\n"
      << "alpha = " << (sched.alpha ? format(*sched.alpha) : std::string("auto")) << "\n"
      << "regime = " << (sched.regime == RegimeRule::kBusyPeriod ? "busy_period" : "fixed_cycle") << "\n"
      << "cycle_length = " << format(sched.cycle_length) << "\n";
  if (sched.wrr_weights) out << "w1 = " << (*sched.wrr_weights)[0] << "\nw2 = " << (*sched.wrr_weights)[1] << "\n";
  const SweepSettings& sweep = config.sweep;
  out << "\n[sweep]\n"
      << "lambda2_start = " << format(sweep.lambda2_start) << "\n"
      << "lambda2_stop = " << format(sweep.lambda2_stop) << "\n"
      << "lambda2_step = " << format(sweep.lambda2_step) << "\n"
      << "fine_grid = " << (sweep.fine_grid ? "on" : "off") << "\n";
  return out.str();
}

PolicyOptions policy_options(const RunConfig& config) {
  PolicyOptions options;
  options.regime_rule = config.scheduler.regime;
  options.cycle_length = config.scheduler.cycle_length;
  options.wrr_weights = config.scheduler.wrr_weights;
  options.alpha = config.scheduler.alpha;
  return options;
}

}  // namespace delaysched
