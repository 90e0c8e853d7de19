#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

#include "pesim/dynamics.hpp"
#include "pesim/errors.hpp"
#include "pesim/observables.hpp"
#include "pesim/schedule.hpp"
#include "pesim/state.hpp"
#include "pesim/trajectory.hpp"

namespace pesim {

template <typename Scalar>
void validate(const IntegratorSettings<Scalar>& settings) {
  if (!(settings.dt > 0)) throw std::invalid_argument("dt must be positive");
  if (settings.record_every < 1)
    throw std::invalid_argument("record_every must be at least 1");
  if (!(settings.max_time > 0))
    throw std::invalid_argument("max_time must be positive");
  if (!(settings.stop_diameter >= 0))
    throw std::invalid_argument("stop_diameter must be nonnegative");
}

/// The step must resolve the PE window: dt <= window / 10.
template <typename Scalar>
void validate(const IntegratorSettings<Scalar>& settings, Scalar pe_window) {
  validate(settings);
  if (!(settings.dt <= pe_window / Scalar(10)))
    throw std::invalid_argument("dt must be at most a tenth of the PE window");
}

template <typename Scalar>
struct Rk4Workspace {
  typename State<Scalar>::Positions k1, k2, k3, k4, xtmp;
};

/// Classical RK4 update of x over [t, t+h] with the weight matrix frozen.
/// The caller guarantees no schedule breakpoint lies inside the step.
template <typename Scalar>
void rk4_step(typename State<Scalar>::Positions& x, Scalar t, Scalar h,
              const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& weights,
              const ModelConfig<Scalar>& model, Rk4Workspace<Scalar>& ws) {
  rhs_into<Scalar>(x, t, weights, model, ws.k1);
  ws.xtmp = x + (h / 2) * ws.k1;
  rhs_into<Scalar>(ws.xtmp, t + h / 2, weights, model, ws.k2);
  ws.xtmp = x + (h / 2) * ws.k2;
  rhs_into<Scalar>(ws.xtmp, t + h / 2, weights, model, ws.k3);
  ws.xtmp = x + h * ws.k3;
  rhs_into<Scalar>(ws.xtmp, t + h, weights, model, ws.k4);
  x += (h / 6) * (ws.k1 + 2 * ws.k2 + 2 * ws.k3 + ws.k4);
}

template <typename Scalar>
State<Scalar> step(const State<Scalar>& state, Scalar h,
                   const ScheduleEnsemble<Scalar>& ensemble,
                   const ModelConfig<Scalar>& model) {
  if (!(h > 0)) throw std::invalid_argument("step size must be positive");
  State<Scalar> next = state;
  const auto weights = ensemble.sample(state.t + h / 2);
  Rk4Workspace<Scalar> ws;
  rk4_step(next.positions, state.t, h, weights, model, ws);
  next.t = state.t + h;
  if (!next.positions.allFinite())
    throw NonFiniteState(double(next.t), "state left the finite range");
  return next;
}

namespace detail {

template <typename Scalar>
void fill_effective_time(Trajectory<Scalar>& traj,
                         const ScheduleEnsemble<Scalar>& ensemble) {
  traj.effective_time.clear();
  if (!ensemble.is_shared()) return;
  const auto& schedule = ensemble.schedules().front();
  traj.effective_time.reserve(traj.samples.size());
  Scalar acc = 0;
  Scalar prev = 0;
  for (const auto& sample : traj.samples) {
    acc += integrate_weight(schedule, prev, sample.t);
    prev = sample.t;
    traj.effective_time.push_back(acc);
  }
}

}  // namespace detail

/// Advances the system from t = 0 on the nominal dt grid refined by every
/// schedule breakpoint, so no step straddles a weight discontinuity. Grid
/// times are computed as multiples of dt, not accumulated. The weight matrix
/// is resampled once per constancy span. Precondition: the model passed
/// validate_hypotheses for this initial state.
template <typename Scalar>
Trajectory<Scalar> simulate(const State<Scalar>& initial,
                            const ScheduleEnsemble<Scalar>& ensemble,
                            const ModelConfig<Scalar>& model,
                            const IntegratorSettings<Scalar>& settings) {
  validate(initial);
  validate(settings);
  if (ensemble.agent_count() != initial.agent_count())
    throw DimensionMismatch("ensemble and state disagree on the agent count");

  Trajectory<Scalar> traj;
  traj.model = model;
  traj.settings = settings;

  typename State<Scalar>::Positions x = initial.positions;
  traj.samples.push_back({Scalar(0), x});

  const Scalar max_time = settings.max_time;
  // times closer than this are merged into one step endpoint
  const Scalar tiny = Scalar(1e-12) * std::max(Scalar(1), max_time);

  if (settings.stop_diameter > 0 && diameter(x) < settings.stop_diameter) {
    traj.stop_reason = StopReason::diameter_threshold;
    detail::fill_effective_time(traj, ensemble);
    return traj;
  }

  BreakpointCursor<Scalar> cursor(ensemble, tiny);
  Scalar span_end = cursor.next_after(Scalar(0));
  typename ScheduleEnsemble<Scalar>::Matrix weights;
  bool weights_fresh = false;
  Rk4Workspace<Scalar> ws;

  Scalar t = 0;
  long long grid_k = 0;
  long long steps_done = 0;
  bool stopped_early = false;

  while (t < max_time - tiny) {
    if (t + tiny >= span_end) {
      span_end = cursor.next_after(t);
      weights_fresh = false;
    }

    Scalar t_next = Scalar(grid_k + 1) * settings.dt;
    bool reaches_grid = true;
    if (max_time < t_next) {
      t_next = max_time;
      reaches_grid = false;
    }
    if (span_end < t_next - tiny) {
      t_next = span_end;
      reaches_grid = false;
    }
    if (reaches_grid) ++grid_k;

    const Scalar h = t_next - t;
    if (h > tiny) {
      if (!weights_fresh) {
        ensemble.sample_into(t + h / 2, weights);
        weights_fresh = true;
      }
      rk4_step(x, t, h, weights, model, ws);
      if (!x.allFinite())
        throw NonFiniteState(double(t_next), "state left the finite range");
      ++steps_done;
      t = t_next;
      if (steps_done % settings.record_every == 0) traj.samples.push_back({t, x});
      if (settings.stop_diameter > 0 && diameter(x) < settings.stop_diameter) {
        stopped_early = true;
        break;
      }
    } else {
      t = t_next;
    }
  }

  if (traj.samples.back().t != t) traj.samples.push_back({t, x});
  traj.stop_reason =
      stopped_early ? StopReason::diameter_threshold : StopReason::max_time;
  detail::fill_effective_time(traj, ensemble);
  return traj;
}

}  // namespace pesim
