#include "pesim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pesim/dynamics.hpp"
#include "pesim/errors.hpp"
#include "pesim/format.hpp"
#include "pesim/observables.hpp"

namespace pesim {

namespace {

// domain separators for the per-purpose RNG streams
constexpr std::uint64_t tag_initial = 0x696e6974u;    // draws of initial positions
constexpr std::uint64_t tag_schedule = 0x73636564u;   // schedule generation
constexpr std::uint64_t tag_phase = 0x70686173u;      // duty-cycle phases

std::uint64_t schedule_seed(const SweepSpec& spec, double mu, int trial) {
  return mix_seed(mix_seed(spec.master_seed, tag_schedule),
                  std::bit_cast<std::uint64_t>(mu), std::uint64_t(trial));
}

WeightScheduleXd make_family_schedule(const SweepSpec& spec,
                                      const PEParametersXd& params,
                                      std::uint64_t seed, double horizon) {
  switch (spec.family) {
    case ScheduleFamily::constant: {
      const double value =
          spec.constant_value ? *spec.constant_value : params.mu / params.window;
      return make_constant(value, horizon);
    }
    case ScheduleFamily::duty_cycle_random_phase: {
      std::mt19937_64 rng(mix_seed(seed, tag_phase));
      std::uniform_real_distribution<double> draw(0.0, params.window);
      return make_duty_cycle(params, draw(rng), horizon);
    }
    case ScheduleFamily::random_blackout:
      return make_random_blackout(params, seed, horizon);
    case ScheduleFamily::random_levels:
      return make_random_levels(params, seed, spec.levels, horizon);
  }
  throw std::logic_error("unhandled schedule family");
}

}  // namespace

void validate(const SweepSpec& spec) {
  if (spec.mu_values.empty())
    throw std::invalid_argument("sweep needs at least one mu value");
  for (const double mu : spec.mu_values) {
    if (!(mu > 0) || !(mu <= spec.window))
      throw std::invalid_argument("every mu must lie in (0, window]");
  }
  if (spec.n_trials < 1) throw std::invalid_argument("n_trials must be at least 1");
  if (spec.agents < 2) throw DegenerateInput("sweep needs at least two agents");
  if (spec.dimension < 1) throw DegenerateInput("sweep needs dimension >= 1");
  if (!(spec.window > 0)) throw std::invalid_argument("PE window must be positive");
  if (!(spec.epsilon > 0))
    throw std::invalid_argument("consensus threshold must be positive");
  if (spec.constant_value && !(*spec.constant_value >= 0 && *spec.constant_value <= 1))
    throw std::invalid_argument("constant weight level must lie in [0, 1]");
  if (spec.family == ScheduleFamily::random_levels && spec.levels.empty())
    throw std::invalid_argument("random_levels family needs a level grid");
  if (spec.threads < 0) throw std::invalid_argument("threads must be nonnegative");
  IntegratorSettingsXd settings{spec.dt, spec.record_every, spec.max_time,
                                spec.epsilon};
  validate(settings, spec.window);
}

StateXd draw_initial_positions(const SweepSpec& spec, int trial) {
  std::mt19937_64 rng(
      mix_seed(mix_seed(spec.master_seed, tag_initial), std::uint64_t(trial)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  StateXd state;
  state.t = 0;
  state.positions.resize(spec.agents, spec.dimension);
  for (Eigen::Index i = 0; i < spec.agents; ++i)
    for (Eigen::Index c = 0; c < spec.dimension; ++c)
      state.positions(i, c) = unit(rng);
  return state;
}

ScheduleEnsembleXd build_ensemble(const SweepSpec& spec, double mu, int trial) {
  const PEParametersXd params{mu, spec.window};
  validate(params);
  const double horizon = spec.max_time;
  const std::uint64_t base = schedule_seed(spec, mu, trial);
  if (spec.shared_schedule) {
    return ScheduleEnsembleXd::shared(
        make_family_schedule(spec, params, mix_seed(base, 0), horizon), spec.agents);
  }
  const std::size_t pairs =
      std::size_t(spec.agents) * std::size_t(spec.agents - 1);
  std::vector<WeightScheduleXd> schedules;
  schedules.reserve(pairs);
  for (std::size_t p = 0; p < pairs; ++p) {
    schedules.push_back(
        make_family_schedule(spec, params, mix_seed(base, 1 + p), horizon));
  }
  return ScheduleEnsembleXd::per_pair(std::move(schedules), spec.agents);
}

TrajectoryXd run_trial_trajectory(const SweepSpec& spec, double mu, int trial) {
  validate(spec);
  try {
    const StateXd initial = draw_initial_positions(spec, trial);
    const ModelConfigXd model{spec.kernel, spec.scaling};
    validate_hypotheses(model, initial);
    const ScheduleEnsembleXd ensemble = build_ensemble(spec, mu, trial);
    IntegratorSettingsXd settings;
    settings.dt = spec.dt;
    settings.record_every = spec.record_every;
    settings.max_time = spec.max_time;
    settings.stop_diameter = spec.epsilon;
    return simulate(initial, ensemble, model, settings);
  } catch (...) {
    std::ostringstream context;
    context << "trial " << trial << " at mu = " << format_double(mu) << " failed";
    std::throw_with_nested(Error(context.str()));
  }
}

std::optional<double> run_trial(const SweepSpec& spec, double mu, int trial) {
  const TrajectoryXd traj = run_trial_trajectory(spec, mu, trial);
  return consensus_time(traj, spec.epsilon);
}

SweepResult run_sweep(const SweepSpec& spec) {
  validate(spec);
  const std::size_t n_mu = spec.mu_values.size();
  const std::size_t cells = n_mu * std::size_t(spec.n_trials);
  std::vector<std::optional<double>> times(cells);

  // cells are pure functions of (spec, mu, trial): any execution order
  // produces the same table
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_guard;
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= cells) return;
      try {
        const std::size_t m = k / std::size_t(spec.n_trials);
        const int trial = int(k % std::size_t(spec.n_trials));
        times[k] = run_trial(spec, spec.mu_values[m], trial);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_guard);
        if (!failure) failure = std::current_exception();
        next.store(cells);
        return;
      }
    }
  };

  unsigned n_threads = spec.threads > 0
                           ? unsigned(spec.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, unsigned(cells));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult result;
  result.rows.reserve(n_mu);
  for (std::size_t m = 0; m < n_mu; ++m) {
    SweepRow row;
    row.mu = spec.mu_values[m];
    std::vector<double> converged;
    converged.reserve(std::size_t(spec.n_trials));
    for (int trial = 0; trial < spec.n_trials; ++trial) {
      const auto& t = times[m * std::size_t(spec.n_trials) + std::size_t(trial)];
      if (t) {
        converged.push_back(*t);
      } else {
        ++row.n_unconverged;
      }
    }
    if (converged.empty())
      throw EmptyAggregate("no trial converged for mu = " + format_double(row.mu));
    double sum = 0;
    row.min_time = converged.front();
    row.max_time = converged.front();
    for (const double t : converged) {
      sum += t;
      row.min_time = std::min(row.min_time, t);
      row.max_time = std::max(row.max_time, t);
    }
    row.mean_time = sum / double(converged.size());
    double ss = 0;
    for (const double t : converged) ss += (t - row.mean_time) * (t - row.mean_time);
    row.std_dev =
        converged.size() > 1 ? std::sqrt(ss / double(converged.size() - 1)) : 0.0;
    result.rows.push_back(row);
  }

  if (result.rows.size() >= 2) {
    std::vector<std::pair<double, double>> points;
    points.reserve(result.rows.size());
    for (const auto& row : result.rows) points.emplace_back(row.mu, row.mean_time);
    result.fit = loglog_fit(points);
  }
  return result;
}

FitResult loglog_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw DegenerateFit("log-log fit needs at least two points");
  std::vector<double> xs, ys;
  xs.reserve(points.size());
  ys.reserve(points.size());
  for (const auto& [mu, time] : points) {
    if (!(mu > 0) || !(time > 0))
      throw std::invalid_argument("log-log fit needs positive coordinates");
    xs.push_back(std::log(mu));
    ys.push_back(std::log(time));
  }
  const double n = double(points.size());
  double xbar = 0, ybar = 0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    xbar += xs[k];
    ybar += ys[k];
  }
  xbar /= n;
  ybar /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    sxx += (xs[k] - xbar) * (xs[k] - xbar);
    sxy += (xs[k] - xbar) * (ys[k] - ybar);
  }
  if (sxx == 0) throw DegenerateFit("log-log fit needs at least two distinct mu");

  FitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double pred = fit.intercept + fit.slope * xs[k];
    ss_res += (ys[k] - pred) * (ys[k] - pred);
    ss_tot += (ys[k] - ybar) * (ys[k] - ybar);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "mu,mean_time,std,min,max,n_unconverged\n";
  for (const auto& row : result.rows) {
    out += format_double(row.mu);
    out += ',';
    out += format_double(row.mean_time);
    out += ',';
    out += format_double(row.std_dev);
    out += ',';
    out += format_double(row.min_time);
    out += ',';
    out += format_double(row.max_time);
    out += ',';
    out += std::to_string(row.n_unconverged);
    out += '\n';
  }
  return out;
}

std::string fit_json(const FitResult& fit) {
  std::string out = "{\"slope\": ";
  out += format_double(fit.slope);
  out += ", \"intercept\": ";
  out += format_double(fit.intercept);
  out += ", \"r_squared\": ";
  out += format_double(fit.r_squared);
  out += "}\n";
  return out;
}

}  // namespace pesim
