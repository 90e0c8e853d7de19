#include "pesim/verify.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "pesim/dynamics.hpp"
#include "pesim/errors.hpp"
#include "pesim/observables.hpp"

namespace pesim {

namespace {

void require_samples(const TrajectoryXd& traj) {
  if (traj.samples.empty()) throw DegenerateInput("trajectory has no samples");
}

/// Shared scan: value(k) must not grow (direction +1) or shrink (direction
/// -1) by more than tol between consecutive samples.
template <typename ValueFn>
CheckReport scan_monotone(const TrajectoryXd& traj, const char* name,
                          int direction, ValueFn value) {
  CheckReport report;
  report.check = name;
  report.margin = std::numeric_limits<double>::infinity();
  const double tol = monotonicity_tolerance(traj);
  double prev = value(traj.samples.front());
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const double cur = value(traj.samples[k]);
    const double slack = direction > 0 ? prev - cur : cur - prev;
    report.margin = std::min(report.margin, slack);
    if (slack < -tol && report.pass) {
      report.pass = false;
      report.witness_time = traj.samples[k].t;
      report.detail = std::string(name) + " moved the wrong way at step " +
                      std::to_string(k);
    }
    prev = cur;
  }
  if (traj.samples.size() < 2) report.margin = 0;
  return report;
}

}  // namespace

double monotonicity_tolerance(const TrajectoryXd& traj) {
  require_samples(traj);
  return 1e-9 * (1.0 + diameter(traj.samples.front().positions));
}

CheckReport check_diameter_monotone(const TrajectoryXd& traj) {
  require_samples(traj);
  return scan_monotone(traj, "diameter_monotone", +1, [](const auto& s) {
    return diameter(s.positions);
  });
}

CheckReport check_gamma_max_monotone(const TrajectoryXd& traj) {
  require_samples(traj);
  return scan_monotone(traj, "gamma_max_monotone", +1, [](const auto& s) {
    return gamma_max(s.positions);
  });
}

CheckReport check_gamma_min_monotone(const TrajectoryXd& traj) {
  require_samples(traj);
  if (traj.dimension() != 1)
    throw DimensionMismatch("gamma_min check requires one-dimensional states");
  return scan_monotone(traj, "gamma_min_monotone", -1, [](const auto& s) {
    return gamma_min_1d(s.positions);
  });
}

CheckReport check_extremal_pairs(const TrajectoryXd& traj) {
  require_samples(traj);
  CheckReport report;
  report.check = "extremal_pair";
  report.margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const CheckReport one = extremal_pair_check(traj.state_at(k));
    report.margin = std::min(report.margin, one.margin);
    if (!one.pass && report.pass) {
      report.pass = false;
      report.witness_time = one.witness_time;
      report.detail = one.detail;
    }
  }
  return report;
}

CheckReport check_barriers(const TrajectoryXd& traj, double k_max, double window) {
  require_samples(traj);
  if (traj.dimension() != 1)
    throw DimensionMismatch("barrier check requires one-dimensional states");

  const double theta = traj.samples.front().t;
  const double duration = traj.samples.back().t - theta;
  CheckReport report;
  report.check = "barrier";
  report.margin = std::numeric_limits<double>::infinity();
  if (duration <= 0 || traj.samples.size() < 2) {
    report.margin = 0;
    report.detail = "trajectory too short for a barrier window";
    return report;
  }

  BarrierSpecXd spec;
  spec.theta = theta;
  spec.window = std::min(window, duration);
  spec.k_max = k_max;
  spec.alpha = gamma_min_1d(traj.samples.front().positions);
  for (Eigen::Index i = 0; i < traj.agent_count(); ++i) {
    spec.z = traj.samples.front().positions(i, 0);
    const CheckReport one = check_barrier(traj, spec, i);
    report.margin = std::min(report.margin, one.margin);
    if (!one.pass && report.pass) {
      report.pass = false;
      report.witness_time = one.witness_time;
      report.detail = "agent " + std::to_string(i) + ": " + one.detail;
    }
  }
  return report;
}

std::vector<CheckReport> verify_trajectory(const TrajectoryXd& traj,
                                           const ModelConfigXd& model,
                                           double pe_window) {
  require_samples(traj);
  std::vector<CheckReport> reports;
  reports.push_back(check_diameter_monotone(traj));
  reports.push_back(check_gamma_max_monotone(traj));
  reports.push_back(check_extremal_pairs(traj));
  if (traj.dimension() == 1) {
    reports.push_back(check_gamma_min_monotone(traj));
    const KernelBoundsXd bounds = validate_hypotheses(model, traj.state_at(0));
    reports.push_back(check_barriers(traj, bounds.k_max, pe_window));
  }
  return reports;
}

}  // namespace pesim
