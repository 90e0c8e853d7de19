#pragma once

#include <Eigen/Core>

#include "pesim/errors.hpp"

namespace pesim {

/// Positions of N agents in R^d at one time instant; one row per agent.
template <typename Scalar = double>
struct State {
  using Positions = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Scalar t = 0;
  Positions positions;

  Eigen::Index agent_count() const { return positions.rows(); }
  Eigen::Index dimension() const { return positions.cols(); }
};

using StateXd = State<double>;

template <typename Scalar>
bool is_finite(const State<Scalar>& state) {
  return state.positions.allFinite();
}

// N >= 2, d >= 1, all coordinates finite.
template <typename Scalar>
void validate(const State<Scalar>& state) {
  if (state.agent_count() < 2) throw DegenerateInput("state must hold at least two agents");
  if (state.dimension() < 1) throw DegenerateInput("state dimension must be at least 1");
  if (!is_finite(state))
    throw NonFiniteState(static_cast<double>(state.t), "state holds a non-finite coordinate");
}

}  // namespace pesim
