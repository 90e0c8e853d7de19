#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "pesim/check.hpp"
#include "pesim/errors.hpp"
#include "pesim/model.hpp"
#include "pesim/observables.hpp"
#include "pesim/state.hpp"

namespace pesim {

/// Checks the kernel is admissible on the configuration's reachable range and
/// returns the bounds the convergence estimates are built on. The kernel
/// minimum is certified by a Lipschitz argument: the grid step h is at most
/// diameter/1e4 and includes every knot, so the true minimum is at least
/// grid_min - L h / 2. Rejects kernels whose certified minimum is not
/// strictly positive.
template <typename Scalar>
KernelBounds<Scalar> validate_hypotheses(const ModelConfig<Scalar>& model,
                                         const State<Scalar>& initial) {
  validate(initial);

  const Scalar lip = model.kernel.lipschitz_bound();
  if (!(lip >= 0) || !std::isfinite(double(lip)))
    throw HypothesisViolation(HypothesisViolation::Kind::kernel_not_lipschitz,
                              "kernel has no finite Lipschitz bound");

  const Scalar d0 = diameter(initial.positions);

  Scalar grid_min;
  Scalar grid_max;
  Scalar slack;
  if (d0 == 0) {
    grid_min = grid_max = model.kernel(Scalar(0));
    slack = 0;
  } else {
    const int segments = 10000;
    const Scalar h = d0 / Scalar(segments);
    grid_min = std::numeric_limits<Scalar>::infinity();
    grid_max = -std::numeric_limits<Scalar>::infinity();
    for (int k = 0; k <= segments; ++k) {
      const Scalar r = (k == segments) ? d0 : Scalar(k) * h;
      const Scalar value = model.kernel(r);
      grid_min = std::min(grid_min, value);
      grid_max = std::max(grid_max, value);
    }
    // knots are the only interior extrema a piecewise-linear kernel can have
    for (const Scalar r : model.kernel.knot_radii()) {
      if (r <= 0 || r >= d0) continue;
      const Scalar value = model.kernel(r);
      grid_min = std::min(grid_min, value);
      grid_max = std::max(grid_max, value);
    }
    slack = lip * h / Scalar(2);
  }

  if (!(grid_min - slack > 0))
    throw HypothesisViolation(
        HypothesisViolation::Kind::kernel_min_not_positive,
        "kernel is not certifiably positive on [0, " + std::to_string(double(d0)) + "]");

  KernelBounds<Scalar> bounds;
  bounds.phi_min = grid_min;
  bounds.phi_max = grid_max;
  bounds.initial_diameter = d0;
  if (model.scaling == ScalingMode::fixed) {
    bounds.k_min = grid_min;
    bounds.k_max = grid_max;
  } else {
    bounds.k_min = grid_min / grid_max;
    bounds.k_max = grid_max / grid_min;
  }
  return bounds;
}

/// Coupling strength of agent i. The rescaled mode normalizes by the mean
/// kernel mass seen by i, the self term phi(0) included.
template <typename Scalar>
Scalar lambda(Eigen::Index i, const State<Scalar>& state,
              const ModelConfig<Scalar>& model) {
  const Eigen::Index n = state.agent_count();
  if (i < 0 || i >= n) throw std::out_of_range("lambda: agent index out of range");
  if (model.scaling == ScalingMode::fixed) return Scalar(1);

  Scalar mass = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    mass += model.kernel((state.positions.row(i) - state.positions.row(j)).norm());
  }
  return Scalar(n) / mass;
}

/// Velocity field of the weighted consensus system,
///   dx_i/dt = (lambda_i / N) sum_j w_ij phi(|x_i - x_j|) (x_j - x_i),
/// written into out (resized as needed). Weights are used as given; the
/// diagonal never contributes.
template <typename Scalar>
void rhs_into(const typename State<Scalar>::Positions& positions, Scalar t,
              const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& weights,
              const ModelConfig<Scalar>& model,
              typename State<Scalar>::Positions& out) {
  const Eigen::Index n = positions.rows();
  const Eigen::Index d = positions.cols();
  if (n < 2) throw DegenerateInput("dynamics need at least two agents");
  if (weights.rows() != n || weights.cols() != n)
    throw DimensionMismatch("weight matrix must be N x N");
  if (!positions.allFinite())
    throw NonFiniteState(double(t), "non-finite state passed to the dynamics");

  out.resize(n, d);
  out.setZero();

  const bool rescaled = model.scaling == ScalingMode::rescaled;
  const Scalar phi0 = rescaled ? model.kernel(Scalar(0)) : Scalar(0);

  if (d == 1) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar xi = positions(i, 0);
      Scalar accum = 0;
      Scalar mass = phi0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const Scalar diff = positions(j, 0) - xi;
        const Scalar phi = model.kernel(std::abs(diff));
        if (rescaled) mass += phi;
        accum += weights(i, j) * phi * diff;
      }
      out(i, 0) = rescaled ? accum / mass : accum / Scalar(n);
    }
    return;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar mass = phi0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const Scalar r = (positions.row(j) - positions.row(i)).norm();
      const Scalar phi = model.kernel(r);
      if (rescaled) mass += phi;
      out.row(i) += (weights(i, j) * phi) * (positions.row(j) - positions.row(i));
    }
    out.row(i) *= rescaled ? Scalar(1) / mass : Scalar(1) / Scalar(n);
  }
}

template <typename Scalar>
typename State<Scalar>::Positions rhs(
    const State<Scalar>& state,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& weights,
    const ModelConfig<Scalar>& model) {
  typename State<Scalar>::Positions out;
  rhs_into<Scalar>(state.positions, state.t, weights, model, out);
  return out;
}

/// Verifies the pointwise bound
///   (k_min / N) sum_j w_ij <= (lambda_i / N) sum_j w_ij phi_ij <= k_max
/// for every agent of the given state. margin is the smallest slack seen.
template <typename Scalar>
CheckReport kernel_sandwich_check(
    const State<Scalar>& state,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& weights,
    const ModelConfig<Scalar>& model, const KernelBounds<Scalar>& bounds) {
  validate(state);
  const Eigen::Index n = state.agent_count();
  if (weights.rows() != n || weights.cols() != n)
    throw DimensionMismatch("weight matrix must be N x N");

  CheckReport report;
  report.check = "kernel_sandwich";
  report.margin = std::numeric_limits<double>::infinity();

  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar li = lambda(i, state, model);
    Scalar weight_sum = 0;
    Scalar coupled_sum = 0;
    // the diagonal term w_ii phi(0) is part of the bound even though it never
    // moves the agent
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar r = (state.positions.row(i) - state.positions.row(j)).norm();
      weight_sum += weights(i, j);
      coupled_sum += weights(i, j) * model.kernel(r);
    }
    const double lower = double(bounds.k_min) * double(weight_sum) / double(n);
    const double mid = double(li) * double(coupled_sum) / double(n);
    const double upper = double(bounds.k_max);
    const double tol = 1e-12 * (1.0 + std::abs(mid) + std::abs(upper));

    const double slack = std::min(mid - lower, upper - mid);
    if (slack < report.margin) report.margin = slack;
    if (mid < lower - tol || mid > upper + tol) {
      report.pass = false;
      report.witness_time = double(state.t);
      report.detail = "agent " + std::to_string(i) + " violates the coupling bounds";
    }
  }
  return report;
}

}  // namespace pesim
