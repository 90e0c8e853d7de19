#pragma once

#include <iosfwd>
#include <string>

#include "pesim/trajectory.hpp"

namespace pesim {

/// CSV with header "t,agent,coord,value", one row per (sample, agent,
/// coordinate). Values are written with shortest round-trip formatting.
void write_trajectory_csv(std::ostream& out, const TrajectoryXd& traj);
void write_trajectory_csv(const std::string& path, const TrajectoryXd& traj);

/// Inverse of write_trajectory_csv. Sample times must appear grouped and
/// strictly increasing; every (agent, coord) cell of a sample must be
/// present. Model and settings metadata are not part of the format and come
/// back default-constructed.
TrajectoryXd read_trajectory_csv(std::istream& in);
TrajectoryXd read_trajectory_csv(const std::string& path);

}  // namespace pesim
