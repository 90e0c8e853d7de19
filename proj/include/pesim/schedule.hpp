#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pesim/errors.hpp"

namespace pesim {

/// Piecewise-constant weight of one directed pair, right-open intervals. The
/// last value persists beyond the horizon.
template <typename Scalar = double>
class WeightSchedule {
 public:
  WeightSchedule(std::vector<Scalar> breakpoints, std::vector<Scalar> values,
                 Scalar horizon)
      : breakpoints_(std::move(breakpoints)),
        values_(std::move(values)),
        horizon_(horizon) {
    if (breakpoints_.empty() || breakpoints_.size() != values_.size())
      throw std::invalid_argument("schedule needs one value per breakpoint");
    if (breakpoints_.front() != 0)
      throw std::invalid_argument("schedule must start at t = 0");
    for (std::size_t k = 1; k < breakpoints_.size(); ++k) {
      if (!(breakpoints_[k] > breakpoints_[k - 1]))
        throw std::invalid_argument("schedule breakpoints must increase strictly");
    }
    for (const Scalar v : values_) {
      if (!(v >= 0 && v <= 1))
        throw std::invalid_argument("schedule values must lie in [0, 1]");
    }
    if (!(horizon_ > 0) || !(horizon_ >= breakpoints_.back()))
      throw std::invalid_argument("schedule horizon must cover the breakpoints");
  }

  Scalar operator()(Scalar t) const { return values_[segment(t)]; }

  /// Index of the interval containing t.
  std::size_t segment(Scalar t) const {
    if (!(t >= 0)) throw std::invalid_argument("schedules are defined for t >= 0");
    const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    return std::size_t(it - breakpoints_.begin()) - 1;
  }

  const std::vector<Scalar>& breakpoints() const { return breakpoints_; }
  const std::vector<Scalar>& values() const { return values_; }
  Scalar horizon() const { return horizon_; }

 private:
  std::vector<Scalar> breakpoints_;
  std::vector<Scalar> values_;
  Scalar horizon_;
};

using WeightScheduleXd = WeightSchedule<double>;

/// Exact integral over [a, b]: sum of value times overlap length per segment.
template <typename Scalar>
Scalar integrate_weight(const WeightSchedule<Scalar>& schedule, Scalar a, Scalar b) {
  if (!(a >= 0) || !(b >= a))
    throw InvalidInterval("integration interval must satisfy 0 <= a <= b");
  const auto& bp = schedule.breakpoints();
  const auto& vals = schedule.values();
  std::size_t i = schedule.segment(a);
  Scalar total = 0;
  Scalar cursor = a;
  while (cursor < b) {
    const Scalar seg_end = (i + 1 < bp.size())
                               ? bp[i + 1]
                               : std::numeric_limits<Scalar>::infinity();
    const Scalar upper = std::min(b, seg_end);
    total += vals[i] * (upper - cursor);
    cursor = upper;
    ++i;
  }
  return total;
}

/// 0 < mu <= window is forced by the weights being bounded by 1.
template <typename Scalar = double>
struct PEParameters {
  Scalar mu = 1;
  Scalar window = 1;
};

using PEParametersXd = PEParameters<double>;

template <typename Scalar>
void validate(const PEParameters<Scalar>& params) {
  if (!(params.mu > 0) || !(params.mu <= params.window))
    throw std::invalid_argument("PE parameters need 0 < mu <= window");
}

template <typename Scalar = double>
struct PEReport {
  Scalar margin = 0;           // min over t of window integral minus mu
  Scalar witness_t = 0;        // where the minimum is attained
  Scalar window_integral = 0;  // the minimal window integral itself
};

using PEReportXd = PEReport<double>;

inline constexpr double pe_comparison_tolerance = 1e-12;

/// Minimum of m(t) = integral over [t, t+window] for t in [0, horizon-window].
/// m is piecewise-linear with kinks only where t or t+window crosses a
/// breakpoint, so enumerating kinks and interval ends is exact.
template <typename Scalar>
PEReport<Scalar> pe_margin(const WeightSchedule<Scalar>& schedule,
                           const PEParameters<Scalar>& params, Scalar horizon) {
  validate(params);
  if (!(horizon >= params.window))
    throw InvalidInterval("verification horizon shorter than the PE window");
  const Scalar T = params.window;
  const Scalar t_max = horizon - T;

  std::vector<Scalar> candidates{Scalar(0), t_max};
  for (const Scalar b : schedule.breakpoints()) {
    candidates.push_back(b);
    candidates.push_back(b - T);
  }
  std::sort(candidates.begin(), candidates.end());

  // scanning in time order makes the witness the earliest minimizer
  PEReport<Scalar> report;
  report.margin = std::numeric_limits<Scalar>::infinity();
  for (const Scalar t : candidates) {
    if (!(t >= 0) || !(t <= t_max)) continue;
    const Scalar m = integrate_weight(schedule, t, t + T);
    if (m - params.mu < report.margin) {
      report.margin = m - params.mu;
      report.witness_t = t;
      report.window_integral = m;
    }
  }
  return report;
}

/// Throws PEViolated when the minimal window integral falls short of mu by
/// more than the comparison tolerance; otherwise returns the margin report.
template <typename Scalar>
PEReport<Scalar> verify_pe(const WeightSchedule<Scalar>& schedule,
                           const PEParameters<Scalar>& params, Scalar horizon) {
  PEReport<Scalar> report = pe_margin(schedule, params, horizon);
  if (double(report.margin) < -pe_comparison_tolerance)
    throw PEViolated(double(report.witness_t), double(report.window_integral),
                     "window integral " + std::to_string(double(report.window_integral)) +
                         " at t = " + std::to_string(double(report.witness_t)) +
                         " falls short of mu = " + std::to_string(double(params.mu)));
  return report;
}

namespace detail {

/// Transition builder shared by the generators: keeps breakpoints strictly
/// increasing, merges equal adjacent values, collapses zero-width segments
/// (the later value wins).
template <typename Scalar>
class TransitionBuilder {
 public:
  TransitionBuilder(Scalar initial_value, Scalar horizon) : horizon_(horizon) {
    bp_.push_back(0);
    vals_.push_back(initial_value);
  }

  void emit(Scalar t, Scalar value) {
    if (!(t > 0) || t >= horizon_) return;
    if (t == bp_.back()) {
      if (bp_.size() == 1) {
        vals_.back() = value;
        return;
      }
      bp_.pop_back();
      vals_.pop_back();
    }
    if (vals_.back() == value) return;
    bp_.push_back(t);
    vals_.push_back(value);
  }

  WeightSchedule<Scalar> build() {
    return WeightSchedule<Scalar>(std::move(bp_), std::move(vals_), horizon_);
  }

 private:
  std::vector<Scalar> bp_;
  std::vector<Scalar> vals_;
  Scalar horizon_;
};

}  // namespace detail

template <typename Scalar>
WeightSchedule<Scalar> make_constant(Scalar value, Scalar horizon) {
  return WeightSchedule<Scalar>({0}, {value}, horizon);
}

/// On-interval of length mu per period, offset by phase and wrapped modulo
/// the period, so every period carries exactly mu of on-time and the PE
/// margin at (mu, window) is exactly 0.
template <typename Scalar>
WeightSchedule<Scalar> make_duty_cycle(const PEParameters<Scalar>& params,
                                       Scalar phase, Scalar horizon) {
  validate(params);
  const Scalar mu = params.mu;
  const Scalar T = params.window;
  if (!(phase >= 0) || !(phase < T))
    throw std::invalid_argument("duty-cycle phase must lie in [0, window)");
  if (!(horizon > 0)) throw std::invalid_argument("horizon must be positive");
  if (mu == T) return make_constant(Scalar(1), horizon);

  // the k = -1 block supplies the wrapped head [0, phase + mu - T) when the
  // on-interval crosses the period end
  const bool wraps = phase + mu - T > 0;
  detail::TransitionBuilder<Scalar> builder(
      (wraps || phase == 0) ? Scalar(1) : Scalar(0), horizon);
  for (long long k = -1; Scalar(k) * T + phase < horizon; ++k) {
    builder.emit(Scalar(k) * T + phase, Scalar(1));
    builder.emit(Scalar(k) * T + phase + mu, Scalar(0));
  }
  return builder.build();
}

/// One on-interval of length mu placed uniformly at random inside each
/// period. Any window of length 2*window contains a whole period, so the
/// result satisfies PE at (mu, 2*window); that claim is re-verified before
/// returning.
template <typename Scalar>
WeightSchedule<Scalar> make_random_blackout(const PEParameters<Scalar>& params,
                                            std::uint64_t seed, Scalar horizon) {
  validate(params);
  const Scalar mu = params.mu;
  const Scalar T = params.window;
  if (!(horizon > 0)) throw std::invalid_argument("horizon must be positive");
  if (mu == T) return make_constant(Scalar(1), horizon);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> offset(0.0, double(T - mu));

  const Scalar first_offset = Scalar(offset(rng));
  detail::TransitionBuilder<Scalar> builder(
      first_offset == 0 ? Scalar(1) : Scalar(0), horizon);
  builder.emit(first_offset, Scalar(1));
  builder.emit(first_offset + mu, Scalar(0));
  for (long long k = 1; Scalar(k) * T < horizon; ++k) {
    const Scalar on = Scalar(k) * T + Scalar(offset(rng));
    builder.emit(on, Scalar(1));
    builder.emit(on + mu, Scalar(0));
  }
  WeightSchedule<Scalar> schedule = builder.build();

  const PEParameters<Scalar> declared{mu, 2 * T};
  if (horizon >= declared.window) {
    try {
      verify_pe(schedule, declared, horizon);
    } catch (const PEViolated& e) {
      throw InternalVerificationFailure(
          std::string("random blackout schedule failed its own PE guarantee: ") + e.what());
    }
  }
  return schedule;
}

/// Random level from the grid on each subinterval of length window/10,
/// redrawn per period until every completed window clears mu. Windows are
/// checked at their piecewise-linear kinks, which all lie on the subinterval
/// lattice, plus the right endpoint horizon - window.
template <typename Scalar>
WeightSchedule<Scalar> make_random_levels(const PEParameters<Scalar>& params,
                                          std::uint64_t seed,
                                          const std::vector<Scalar>& levels,
                                          Scalar horizon,
                                          int* retries_out = nullptr) {
  validate(params);
  if (levels.empty()) throw std::invalid_argument("level grid must be nonempty");
  for (const Scalar v : levels) {
    if (!(v >= 0 && v <= 1))
      throw std::invalid_argument("levels must lie in [0, 1]");
  }
  if (!(horizon > 0)) throw std::invalid_argument("horizon must be positive");

  const Scalar T = params.window;
  const Scalar sub = T / Scalar(10);
  const long long periods = (long long)std::ceil(double(horizon / T));
  const Scalar accept = params.mu - Scalar(0.5) * Scalar(pe_comparison_tolerance);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, levels.size() - 1);
  std::vector<Scalar> seq;
  seq.reserve(std::size_t(10 * periods));
  int retries = 0;

  auto window_mass = [&](Scalar t) {
    Scalar total = 0;
    long long q = std::max((long long)std::floor(double(t / sub)), 0LL);
    while (Scalar(q) * sub < t + T && q < (long long)seq.size()) {
      const Scalar lo = std::max(t, Scalar(q) * sub);
      const Scalar hi = std::min(t + T, Scalar(q + 1) * sub);
      if (hi > lo) total += seq[std::size_t(q)] * (hi - lo);
      ++q;
    }
    return total;
  };

  for (long long k = 0; k < periods; ++k) {
    bool accepted = false;
    for (int attempt = 0; attempt < 1000 && !accepted; ++attempt) {
      if (attempt > 0) ++retries;
      seq.resize(std::size_t(10 * k));
      for (int j = 0; j < 10; ++j) seq.push_back(levels[pick(rng)]);

      // windows newly completed by period k start in ((k-1)T, kT]
      accepted = true;
      const long long j_lo = (k == 0) ? 0 : 10 * (k - 1) + 1;
      const long long j_hi = (k == 0) ? 0 : 10 * k;
      for (long long j = j_lo; j <= j_hi; ++j) {
        const Scalar t = Scalar(j) * sub;
        if (t > horizon - T) break;
        if (!(window_mass(t) >= accept)) {
          accepted = false;
          break;
        }
      }
      if (accepted && k == periods - 1 && horizon >= T &&
          !(window_mass(horizon - T) >= accept)) {
        accepted = false;
      }
    }
    if (!accepted)
      throw GenerationFailed(
          "could not draw levels meeting the PE bound within 1000 attempts");
  }
  if (retries_out) *retries_out = retries;

  std::vector<Scalar> bp{0};
  std::vector<Scalar> vals{seq.front()};
  for (std::size_t j = 1; j < seq.size(); ++j) {
    const Scalar t = Scalar((long long)j) * sub;
    if (t >= horizon) break;
    if (seq[j] == vals.back()) continue;
    bp.push_back(t);
    vals.push_back(seq[j]);
  }
  WeightSchedule<Scalar> schedule(std::move(bp), std::move(vals), horizon);

  if (horizon >= T) {
    try {
      verify_pe(schedule, params, horizon);
    } catch (const PEViolated& e) {
      throw InternalVerificationFailure(
          std::string("random levels schedule failed its own PE bound: ") + e.what());
    }
  }
  return schedule;
}

/// Weight schedules for every directed pair, either one shared schedule or
/// one per pair. Sampled matrices carry 1 on the diagonal; the dynamics never
/// reads it.
template <typename Scalar = double>
class ScheduleEnsemble {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  static ScheduleEnsemble shared(WeightSchedule<Scalar> schedule, Eigen::Index agents) {
    require_agents(agents);
    ScheduleEnsemble e;
    e.agents_ = agents;
    e.shared_ = true;
    e.schedules_.push_back(std::move(schedule));
    return e;
  }

  /// schedules indexed by pair_index, size agents*(agents-1).
  static ScheduleEnsemble per_pair(std::vector<WeightSchedule<Scalar>> schedules,
                                   Eigen::Index agents) {
    require_agents(agents);
    if (schedules.size() != std::size_t(agents) * std::size_t(agents - 1))
      throw DimensionMismatch("need one schedule per ordered pair of agents");
    ScheduleEnsemble e;
    e.agents_ = agents;
    e.shared_ = false;
    e.schedules_ = std::move(schedules);
    return e;
  }

  static std::size_t pair_index(Eigen::Index i, Eigen::Index j, Eigen::Index agents) {
    if (i < 0 || j < 0 || i >= agents || j >= agents || i == j)
      throw std::out_of_range("pair index wants distinct agents in range");
    return std::size_t(i) * std::size_t(agents - 1) + std::size_t(j < i ? j : j - 1);
  }

  Eigen::Index agent_count() const { return agents_; }
  bool is_shared() const { return shared_; }

  const WeightSchedule<Scalar>& schedule(Eigen::Index i, Eigen::Index j) const {
    return shared_ ? schedules_.front()
                   : schedules_[pair_index(i, j, agents_)];
  }

  /// All distinct schedules; a single entry when shared.
  const std::vector<WeightSchedule<Scalar>>& schedules() const { return schedules_; }

  void sample_into(Scalar t, Matrix& out) const {
    out.resize(agents_, agents_);
    if (shared_) {
      out.setConstant(schedules_.front()(t));
    } else {
      for (Eigen::Index i = 0; i < agents_; ++i)
        for (Eigen::Index j = 0; j < agents_; ++j)
          if (i != j) out(i, j) = schedules_[pair_index(i, j, agents_)](t);
    }
    out.diagonal().setOnes();
  }

  Matrix sample(Scalar t) const {
    Matrix out;
    sample_into(t, out);
    return out;
  }

 private:
  static void require_agents(Eigen::Index agents) {
    if (agents < 2) throw DegenerateInput("an ensemble needs at least two agents");
  }

  std::vector<WeightSchedule<Scalar>> schedules_;
  Eigen::Index agents_ = 0;
  bool shared_ = true;
};

using ScheduleEnsembleXd = ScheduleEnsemble<double>;

/// Forward scan over the union of ensemble breakpoints. Queries must come
/// with nondecreasing t; each underlying schedule is walked once in total.
template <typename Scalar = double>
class BreakpointCursor {
 public:
  BreakpointCursor(const ScheduleEnsemble<Scalar>& ensemble, Scalar slack)
      : ensemble_(&ensemble),
        pos_(ensemble.schedules().size(), 0),
        slack_(slack) {}

  /// Smallest breakpoint strictly above t + slack, +infinity if none remain.
  Scalar next_after(Scalar t) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    const auto& schedules = ensemble_->schedules();
    for (std::size_t s = 0; s < schedules.size(); ++s) {
      const auto& bp = schedules[s].breakpoints();
      std::size_t& k = pos_[s];
      while (k < bp.size() && bp[k] <= t + slack_) ++k;
      if (k < bp.size()) best = std::min(best, bp[k]);
    }
    return best;
  }

 private:
  const ScheduleEnsemble<Scalar>* ensemble_;
  std::vector<std::size_t> pos_;
  Scalar slack_;
};

}  // namespace pesim
