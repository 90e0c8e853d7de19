#pragma once

#include <string>

#include "pesim/experiments.hpp"
#include "pesim/trajectory.hpp"

namespace pesim {

/// Agent positions against time, one polyline per agent. Diagnostic quality:
/// plain axes, a handful of ticks. Requires one-dimensional states.
std::string svg_trajectory_plot(const TrajectoryXd& traj);

/// Log-log scatter of mean consensus time against mu with the fitted line
/// overlaid when present.
std::string svg_sweep_plot(const SweepResult& result);

}  // namespace pesim
