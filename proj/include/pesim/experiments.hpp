#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pesim/integrator.hpp"
#include "pesim/kernel.hpp"
#include "pesim/model.hpp"
#include "pesim/schedule.hpp"
#include "pesim/state.hpp"
#include "pesim/trajectory.hpp"

namespace pesim {

enum class ScheduleFamily {
  duty_cycle_random_phase,
  random_blackout,
  random_levels,
  constant
};

/// Monte Carlo sweep description: n_trials runs per mu value, uniform [0,1]^d
/// initial positions. Trial i reuses the same initial configuration across
/// all mu values; schedules are redrawn per mu.
struct SweepSpec {
  std::vector<double> mu_values{1.0, 0.6, 0.3, 0.1};
  int n_trials = 100;
  Eigen::Index agents = 10;
  Eigen::Index dimension = 1;
  double window = 1.0;  // PE window
  double epsilon = 1e-2;
  InfluenceKernelXd kernel = InfluenceKernelXd::constant(1);
  ScalingMode scaling = ScalingMode::fixed;
  ScheduleFamily family = ScheduleFamily::duty_cycle_random_phase;
  bool shared_schedule = false;
  std::uint64_t master_seed = 0;
  double max_time = 200.0;
  double dt = 1e-3;
  long long record_every = 1;
  // constant family: weight level; unset means mu / window (PE margin 0)
  std::optional<double> constant_value;
  // random_levels family: the level grid
  std::vector<double> levels{0.0, 0.5, 1.0};
  int threads = 0;  // 0 picks the hardware concurrency
};

void validate(const SweepSpec& spec);

struct SweepRow {
  double mu = 0;
  double mean_time = 0;
  double std_dev = 0;
  double min_time = 0;
  double max_time = 0;
  int n_unconverged = 0;
};

struct FitResult {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<FitResult> fit;  // absent for a single-mu sweep
};

/// Uniform [0,1]^d positions for one trial, identical for every mu.
StateXd draw_initial_positions(const SweepSpec& spec, int trial);

/// Deterministic ensemble for one (mu, trial) cell.
ScheduleEnsembleXd build_ensemble(const SweepSpec& spec, double mu, int trial);

/// Full trajectory of one cell; stops early at the consensus threshold.
TrajectoryXd run_trial_trajectory(const SweepSpec& spec, double mu, int trial);

/// Consensus time of one cell, absent when max_time was hit first.
std::optional<double> run_trial(const SweepSpec& spec, double mu, int trial);

SweepResult run_sweep(const SweepSpec& spec);

/// OLS line through (ln mu, ln time) plus the coefficient of determination.
FitResult loglog_fit(const std::vector<std::pair<double, double>>& points);

std::string sweep_csv(const SweepResult& result);
std::string fit_json(const FitResult& fit);

}  // namespace pesim
