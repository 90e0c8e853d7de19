#pragma once

#include <vector>

#include "pesim/check.hpp"
#include "pesim/model.hpp"
#include "pesim/trajectory.hpp"

namespace pesim {

/// Per-step slack for the monotonicity checks, scaled by the initial
/// diameter to stay unit-free.
double monotonicity_tolerance(const TrajectoryXd& traj);

/// Diameter never increases along the samples (up to discretization slack).
CheckReport check_diameter_monotone(const TrajectoryXd& traj);

/// Largest agent norm never increases.
CheckReport check_gamma_max_monotone(const TrajectoryXd& traj);

/// Smallest coordinate never decreases; one-dimensional states only.
CheckReport check_gamma_min_monotone(const TrajectoryXd& traj);

/// Extremal-pair scalar product bounds hold at every sample.
CheckReport check_extremal_pairs(const TrajectoryXd& traj);

/// Sliding-barrier bound for every agent with the floor set to the smallest
/// coordinate at the window start; one-dimensional states only.
CheckReport check_barriers(const TrajectoryXd& traj, double k_max, double window);

/// The full replayable battery: monotonicity, extremal pairs, and (d = 1)
/// barriers with k_max derived from the model on the first sample.
std::vector<CheckReport> verify_trajectory(const TrajectoryXd& traj,
                                           const ModelConfigXd& model,
                                           double pe_window);

}  // namespace pesim
