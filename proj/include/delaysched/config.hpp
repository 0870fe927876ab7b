#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "delaysched/experiment_harness.hpp"
#include "delaysched/scheduler_zoo.hpp"
#include "delaysched/traffic_model.hpp"

namespace delaysched {

struct SimulationSettings {
  double horizon = 2e6;
  double warmup_fraction = 0.1;
  std::size_t replications = 20;
  std::uint64_t master_seed = 20161;

  bool operator==(const SimulationSettings&) const = default;
};

struct SchedulerSettings {
  SchedulerKind variant = SchedulerKind::kProposed;
  /// Fixed alpha for the proposed scheduler; unset ("auto") solves for it.
  std::optional<double> alpha;
  RegimeRule regime = RegimeRule::kBusyPeriod;
  double cycle_length = 100.0;
  std::optional<std::array<unsigned, 2>> wrr_weights;

  bool operator==(const SchedulerSettings&) const = default;
};

struct SweepSettings {
  double lambda2_start = 0.01;
  double lambda2_stop = 0.46;
  double lambda2_step = 0.025;
  bool fine_grid = true;

  bool operator==(const SweepSettings&) const = default;
};

/// Contents of an INI-style configuration file:
///
///   [system]     server_rate
///   [class1]     lambda size a b beta [second_moment]    (same for [class2])
///   [simulation] horizon warmup_fraction replications master_seed
///   [scheduler]  variant alpha regime cycle_length w1 w2
///   [sweep]      lambda2_start lambda2_stop lambda2_step fine_grid
///
/// Times are in seconds, sizes in bytes, rates per second.
struct RunConfig {
  SystemConfig system;
  SimulationSettings simulation;
  SchedulerSettings scheduler;
  SweepSettings sweep;

  bool operator==(const RunConfig&) const = default;
};

/// Parses configuration text; `overrides` are "section.key=value" assignments
/// applied before validation. Throws ConfigError on syntax errors, unknown
/// keys, missing required keys or values that violate an invariant.
RunConfig parse_config(std::string_view text, std::span<const std::string> overrides = {});
RunConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides = {});

/// Text that parse_config() maps back to an equal RunConfig.
std::string serialize_config(const RunConfig& config);

PolicyOptions policy_options(const RunConfig& config);

}  // namespace delaysched
