#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pesim/check.hpp"
#include "pesim/errors.hpp"
#include "pesim/state.hpp"
#include "pesim/trajectory.hpp"

namespace pesim {

/// Largest pairwise Euclidean distance; 0 for a single agent.
template <typename Derived>
typename Derived::Scalar diameter(const Eigen::MatrixBase<Derived>& positions) {
  using Scalar = typename Derived::Scalar;
  Scalar best = 0;
  for (Eigen::Index i = 0; i < positions.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < positions.rows(); ++j) {
      best = std::max(best, (positions.row(i) - positions.row(j)).norm());
    }
  }
  return best;
}

template <typename Scalar>
Scalar diameter(const State<Scalar>& state) {
  return diameter(state.positions);
}

/// Largest agent norm, max_i |x_i|.
template <typename Derived>
typename Derived::Scalar gamma_max(const Eigen::MatrixBase<Derived>& positions) {
  if (positions.rows() == 0) throw DegenerateInput("gamma_max needs at least one agent");
  return positions.rowwise().norm().maxCoeff();
}

template <typename Scalar>
Scalar gamma_max(const State<Scalar>& state) {
  return gamma_max(state.positions);
}

/// Smallest coordinate, defined for scalar states only.
template <typename Derived>
typename Derived::Scalar gamma_min_1d(const Eigen::MatrixBase<Derived>& positions) {
  if (positions.cols() != 1)
    throw DimensionMismatch("gamma_min_1d requires one-dimensional states");
  if (positions.rows() == 0) throw DegenerateInput("gamma_min_1d needs at least one agent");
  return positions.col(0).minCoeff();
}

template <typename Scalar>
Scalar gamma_min_1d(const State<Scalar>& state) {
  return gamma_min_1d(state.positions);
}

/// Exponential barrier sliding from z down to alpha at rate k_max.
template <typename Scalar = double>
struct BarrierSpec {
  Scalar alpha = 0;   // floor the barrier decays towards
  Scalar z = 0;       // start level, z >= alpha
  Scalar theta = 0;   // window start time
  Scalar window = 1;  // window length, > 0
  Scalar k_max = 1;   // decay rate, > 0
};

using BarrierSpecXd = BarrierSpec<double>;

template <typename Scalar>
void validate(const BarrierSpec<Scalar>& spec) {
  if (!(spec.z >= spec.alpha)) throw std::invalid_argument("barrier start must be >= its floor");
  if (!(spec.window > 0)) throw std::invalid_argument("barrier window must be positive");
  if (!(spec.k_max > 0)) throw std::invalid_argument("barrier rate must be positive");
}

/// psi(tau) = alpha + exp(-k_max tau) (z - alpha). Decreasing from z to alpha.
template <typename Scalar>
Scalar psi(const BarrierSpec<Scalar>& spec, Scalar tau) {
  validate(spec);
  if (!(tau >= 0)) throw std::invalid_argument("barrier offset must be nonnegative");
  return spec.alpha + std::exp(-spec.k_max * tau) * (spec.z - spec.alpha);
}

/// Every agent's scalar product with the direction spanned by a diameter-
/// attaining pair must stay between the pair's own values. Checked for each
/// pair attaining the maximum distance exactly.
template <typename Scalar>
CheckReport extremal_pair_check(const State<Scalar>& state) {
  validate(state);
  const auto& x = state.positions;
  const Eigen::Index n = x.rows();

  Scalar dmax = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      dmax = std::max(dmax, (x.row(i) - x.row(j)).norm());

  CheckReport report;
  report.check = "extremal_pair";
  report.margin = std::numeric_limits<double>::infinity();
  if (dmax == 0) {
    report.margin = 0;
    report.detail = "all agents coincide";
    return report;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if ((x.row(i) - x.row(j)).norm() != dmax) continue;
      const auto v = x.row(i) - x.row(j);
      const Scalar hi = x.row(i).dot(v);
      const Scalar lo = x.row(j).dot(v);
      const double tol =
          1e-10 * (1.0 + std::max(std::abs(double(hi)), std::abs(double(lo))));
      for (Eigen::Index k = 0; k < n; ++k) {
        const Scalar s = x.row(k).dot(v);
        report.margin = std::min(report.margin,
                                 std::min(double(hi - s), double(s - lo)));
        if (s > hi + tol || s < lo - tol) {
          report.pass = false;
          report.witness_time = double(state.t);
          report.detail = "agent " + std::to_string(k) +
                          " extends past extremal pair (" + std::to_string(i) +
                          "," + std::to_string(j) + ")";
        }
      }
    }
  }
  return report;
}

/// Scalar trajectory of the projections (x_i - x0) . v. Geometry metadata of
/// the source run is preserved.
template <typename Scalar>
Trajectory<Scalar> project(const Trajectory<Scalar>& traj,
                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x0,
                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
  if (v.norm() == 0) throw ZeroDirection("projection direction must be nonzero");
  if (traj.samples.empty()) throw DegenerateInput("cannot project an empty trajectory");
  if (x0.size() != traj.dimension() || v.size() != traj.dimension())
    throw DimensionMismatch("projection inputs must match the trajectory dimension");

  Trajectory<Scalar> out;
  out.stop_reason = traj.stop_reason;
  out.model = traj.model;
  out.settings = traj.settings;
  out.effective_time = traj.effective_time;
  out.samples.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    typename Trajectory<Scalar>::Positions y =
        (s.positions.rowwise() - x0.transpose()) * v;
    out.samples.push_back({s.t, std::move(y)});
  }
  return out;
}

/// First time the diameter drops below epsilon, linearly interpolated between
/// the bracketing samples. Empty when the run never got below epsilon.
template <typename Scalar>
std::optional<Scalar> consensus_time(const Trajectory<Scalar>& traj, Scalar epsilon) {
  if (!(epsilon > 0)) throw std::invalid_argument("consensus threshold must be positive");
  if (traj.samples.empty()) throw DegenerateInput("consensus_time of an empty trajectory");

  Scalar prev_t = 0;
  Scalar prev_d = 0;
  bool have_prev = false;
  for (const auto& s : traj.samples) {
    const Scalar d = diameter(s.positions);
    if (d < epsilon) {
      if (!have_prev) return Scalar(0);
      const Scalar frac = (prev_d - epsilon) / (prev_d - d);
      return prev_t + frac * (s.t - prev_t);
    }
    prev_t = s.t;
    prev_d = d;
    have_prev = true;
  }
  return std::nullopt;
}

/// Verifies one scalar agent stays at or above the sliding barrier on
/// [theta, theta + window] once it first reaches it. Preconditions: the
/// trajectory is one-dimensional, has a sample at theta, and every agent sits
/// at or above alpha there.
template <typename Scalar>
CheckReport check_barrier(const Trajectory<Scalar>& traj,
                          const BarrierSpec<Scalar>& spec, Eigen::Index agent) {
  validate(spec);
  if (traj.dimension() != 1)
    throw DimensionMismatch("barrier check requires one-dimensional states");
  if (agent < 0 || agent >= traj.agent_count())
    throw std::out_of_range("barrier check agent index out of range");

  const double time_tol = 1e-9 * (1.0 + std::abs(double(spec.theta)));
  std::size_t k0 = traj.samples.size();
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    if (traj.samples[k].t >= spec.theta - time_tol) {
      k0 = k;
      break;
    }
  }
  if (k0 == traj.samples.size() ||
      std::abs(double(traj.samples[k0].t - spec.theta)) > time_tol)
    throw PreconditionFailed("trajectory has no sample at the barrier start time");

  const auto& at_theta = traj.samples[k0].positions;
  const double floor_tol = 1e-12 * (1.0 + std::abs(double(spec.alpha)));
  for (Eigen::Index i = 0; i < at_theta.rows(); ++i) {
    if (double(at_theta(i, 0)) < double(spec.alpha) - floor_tol)
      throw PreconditionFailed("agent below the barrier floor at the window start");
  }

  const double tol = 1e-7 * (1.0 + std::abs(double(spec.z - spec.alpha)));
  CheckReport report;
  report.check = "barrier";
  report.margin = std::numeric_limits<double>::infinity();

  bool crossed = false;
  for (std::size_t k = k0; k < traj.samples.size(); ++k) {
    const Scalar t = traj.samples[k].t;
    if (double(t) > double(spec.theta + spec.window) + time_tol) break;
    const Scalar tau = std::max(Scalar(0), t - spec.theta);
    const Scalar bound = psi(spec, tau);
    const Scalar value = traj.samples[k].positions(agent, 0);
    if (!crossed) {
      if (value >= bound) {
        crossed = true;
        report.witness_time = double(t);
        report.margin = double(value - bound);
      }
      continue;
    }
    const double slack = double(value - bound);
    report.margin = std::min(report.margin, slack);
    if (slack < -tol) {
      report.pass = false;
      report.witness_time = double(t);
      report.detail = "agent " + std::to_string(agent) + " fell below the barrier";
      return report;
    }
  }
  if (!crossed) {
    report.margin = 0;
    report.detail = "agent never reached the barrier inside the window";
  }
  return report;
}

}  // namespace pesim
