#pragma once

#include <cstddef>
#include <vector>

#include "pesim/model.hpp"
#include "pesim/state.hpp"

namespace pesim {

enum class StopReason { max_time, diameter_threshold };

template <typename Scalar = double>
struct IntegratorSettings {
  Scalar dt = Scalar(1e-3);
  long long record_every = 1;  // record every k-th accepted step
  Scalar max_time = Scalar(10);
  Scalar stop_diameter = Scalar(0);  // 0 disables the early stop
};

using IntegratorSettingsXd = IntegratorSettings<double>;

/// Recorded solution. Sample times are exact step endpoints; the first sample
/// is the initial state at t = 0 and the last one is the state where
/// integration stopped.
template <typename Scalar = double>
struct Trajectory {
  using Positions = typename State<Scalar>::Positions;

  struct Sample {
    Scalar t;
    Positions positions;
  };

  std::vector<Sample> samples;
  StopReason stop_reason = StopReason::max_time;
  ModelConfig<Scalar> model;
  IntegratorSettings<Scalar> settings;

  /// Cumulative integral of the shared weight up to each sample time. Empty
  /// unless the ensemble driving the run shared a single schedule.
  std::vector<Scalar> effective_time;

  Eigen::Index agent_count() const {
    return samples.empty() ? 0 : samples.front().positions.rows();
  }
  Eigen::Index dimension() const {
    return samples.empty() ? 0 : samples.front().positions.cols();
  }

  State<Scalar> state_at(std::size_t k) const {
    return State<Scalar>{samples.at(k).t, samples.at(k).positions};
  }
};

using TrajectoryXd = Trajectory<double>;

}  // namespace pesim
