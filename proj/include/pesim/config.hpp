#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pesim/experiments.hpp"
#include "pesim/kernel.hpp"
#include "pesim/model.hpp"
#include "pesim/trajectory.hpp"

namespace pesim {

/// Typed mirror of the config file. Sections [model], [kernel], [schedule],
/// [integrator], [sweep]; unknown sections and keys are rejected with the
/// offending line number. Fields keep their defaults when a key is absent.
struct RunConfig {
  // [model]
  Eigen::Index agents = 10;
  Eigen::Index dimension = 1;
  ScalingMode scaling = ScalingMode::fixed;

  // [kernel]
  InfluenceKernelXd kernel = InfluenceKernelXd::constant(1);

  // [schedule]
  ScheduleFamily schedule_family = ScheduleFamily::duty_cycle_random_phase;
  double mu = 0.3;
  double window = 1.0;
  bool shared_schedule = false;
  std::optional<double> constant_value;  // constant family only
  std::vector<double> levels{0.0, 0.5, 1.0};  // random_levels family only

  // [integrator]
  IntegratorSettingsXd integrator;

  // [sweep]
  std::vector<double> mu_values{1.0, 0.6, 0.3, 0.1};
  int trials = 100;
  double epsilon = 1e-2;
  std::uint64_t master_seed = 0;
  int threads = 0;

  bool has_model = false;
  bool has_kernel = false;
  bool has_schedule = false;
  bool has_integrator = false;
  bool has_sweep = false;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical form: every section, fixed key order, shortest round-trip
/// numbers. parse(serialize(c)) reproduces c.
std::string serialize_config(const RunConfig& config);

ModelConfigXd make_model(const RunConfig& config);

/// Sweep over config.mu_values with the configured kernel and schedule
/// family. The single-run mu is not consulted.
SweepSpec make_sweep_spec(const RunConfig& config);

}  // namespace pesim
