#include "doctest.h"

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "pesim/dynamics.hpp"
#include "pesim/integrator.hpp"
#include "pesim/observables.hpp"

using pesim::BarrierSpecXd;
using pesim::InfluenceKernelXd;
using pesim::ModelConfigXd;
using pesim::ScalingMode;
using pesim::ScheduleEnsembleXd;
using pesim::StateXd;
using pesim::TrajectoryXd;

namespace {

Eigen::MatrixXd random_cloud(std::mt19937_64& rng, int n, int d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < d; ++c) x(i, c) = u(rng);
  return x;
}

double brute_diameter(const Eigen::MatrixXd& x) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.rows(); ++j)
      best = std::max(best, (x.row(i) - x.row(j)).norm());
  return best;
}

double brute_gamma_max(const Eigen::MatrixXd& x) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) best = std::max(best, x.row(i).norm());
  return best;
}

TrajectoryXd quick_run(std::uint64_t seed, int n, double mu, double max_time) {
  std::mt19937_64 rng(seed);
  StateXd s;
  s.t = 0.0;
  s.positions = random_cloud(rng, n, 1, 0.0, 1.0);
  ModelConfigXd m{InfluenceKernelXd::rational_decay(1.0, 1.0, 1.0), ScalingMode::fixed};
  const auto sched = pesim::make_random_blackout(pesim::PEParametersXd{mu, 1.0},
                                                 seed ^ 0x9e37, max_time);
  const auto e = ScheduleEnsembleXd::shared(sched, n);
  pesim::IntegratorSettingsXd cfg;
  cfg.dt = 1e-2;
  cfg.max_time = max_time;
  return pesim::simulate(s, e, m, cfg);
}

}  // namespace

TEST_CASE("diameter matches a brute force scan") {
  Eigen::MatrixXd consensus = Eigen::MatrixXd::Constant(4, 2, 0.3);
  CHECK(pesim::diameter(consensus) == 0.0);

  Eigen::MatrixXd pair(2, 1);
  pair << 0.0, 1.0;
  CHECK(pesim::diameter(pair) == 1.0);

  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 10; ++rep) {
    const auto x = random_cloud(rng, 10, 3, -2.0, 2.0);
    CHECK(pesim::diameter(x) == brute_diameter(x));
  }
}

TEST_CASE("extent observables match hand values") {
  Eigen::MatrixXd x(2, 1);
  x << -2.0, 3.0;
  CHECK(pesim::gamma_max(x) == 3.0);
  CHECK(pesim::gamma_min_1d(x) == -2.0);

  Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(3, 2);
  CHECK(pesim::gamma_max(zeros) == 0.0);

  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const auto y = random_cloud(rng, 7, 2, -1.0, 1.0);
    CHECK(pesim::gamma_max(y) == brute_gamma_max(y));
  }

  CHECK_THROWS_AS(pesim::gamma_min_1d(random_cloud(rng, 3, 2, 0.0, 1.0)),
                  pesim::DimensionMismatch);
}

TEST_CASE("barrier curve interpolates between start and floor") {
  BarrierSpecXd spec;
  spec.alpha = 0.0;
  spec.z = 1.0;
  spec.k_max = 1.0;
  spec.theta = 0.0;
  CHECK(pesim::psi(spec, 0.0) == 1.0);
  CHECK(pesim::psi(spec, 1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-15));

  BarrierSpecXd flat = spec;
  flat.z = flat.alpha = 0.7;
  CHECK(pesim::psi(flat, 3.0) == 0.7);

  double prev = pesim::psi(spec, 0.0);
  for (int k = 1; k <= 50; ++k) {
    const double cur = pesim::psi(spec, 0.1 * k);
    CHECK(cur <= prev);
    CHECK(cur >= spec.alpha);
    prev = cur;
  }

  BarrierSpecXd bad = spec;
  bad.z = -0.5;
  CHECK_THROWS_AS(pesim::psi(bad, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(pesim::psi(spec, -0.1), std::invalid_argument);
}

TEST_CASE("extremal pair support holds for point clouds") {
  StateXd two;
  two.t = 0.0;
  two.positions.resize(2, 1);
  two.positions << 0.0, 1.0;
  CHECK(pesim::extremal_pair_check(two).pass);

  StateXd collinear;
  collinear.t = 0.0;
  collinear.positions.resize(3, 1);
  collinear.positions << 0.0, 0.5, 1.0;
  const auto rep = pesim::extremal_pair_check(collinear);
  CHECK(rep.pass);
  CHECK(rep.margin >= 0.0);

  StateXd same;
  same.t = 0.0;
  same.positions = Eigen::MatrixXd::Constant(4, 2, 1.5);
  const auto flat = pesim::extremal_pair_check(same);
  CHECK(flat.pass);
  CHECK(flat.margin == 0.0);

  std::mt19937_64 rng(3);
  for (int rep_i = 0; rep_i < 50; ++rep_i) {
    StateXd s;
    s.t = 0.0;
    s.positions = random_cloud(rng, 8, 3, -1.0, 1.0);
    CHECK(pesim::extremal_pair_check(s).pass);
  }
}

TEST_CASE("projection extracts scalar trajectories") {
  auto traj = quick_run(11, 5, 0.5, 5.0);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(1);
  const auto flat = pesim::project(traj, x0, v);
  REQUIRE(flat.samples.size() == traj.samples.size());
  CHECK(flat.stop_reason == traj.stop_reason);
  for (std::size_t k = 0; k < flat.samples.size(); ++k) {
    CHECK(flat.samples[k].t == traj.samples[k].t);
    CHECK((flat.samples[k].positions - traj.samples[k].positions).cwiseAbs().maxCoeff() ==
          0.0);
  }

  // a projected diameter never exceeds |v| times the ambient diameter
  Eigen::VectorXd v2 = Eigen::VectorXd::Constant(1, 2.5);
  const auto scaled = pesim::project(traj, x0, v2);
  for (std::size_t k = 0; k < scaled.samples.size(); ++k)
    CHECK(pesim::diameter(scaled.samples[k].positions) <=
          2.5 * pesim::diameter(traj.samples[k].positions) + 1e-12);

  const Eigen::VectorXd zero1 = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd ones2 = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(pesim::project(traj, x0, zero1), pesim::ZeroDirection);
  CHECK_THROWS_AS(pesim::project(traj, zero2, ones2), pesim::DimensionMismatch);
}

TEST_CASE("consensus time interpolates the threshold crossing") {
  // two agents under constant full coupling contract like exp(-t)
  StateXd s;
  s.t = 0.0;
  s.positions.resize(2, 1);
  s.positions << 0.0, 1.0;
  ModelConfigXd m{InfluenceKernelXd::constant(1.0), ScalingMode::fixed};
  const auto e = ScheduleEnsembleXd::shared(pesim::make_constant(1.0, 10.0), 2);
  pesim::IntegratorSettingsXd cfg;
  cfg.dt = 1e-3;
  cfg.max_time = 10.0;
  const auto traj = pesim::simulate(s, e, m, cfg);
  const auto t = pesim::consensus_time(traj, 1e-2);
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(std::log(100.0)).epsilon(1e-5));

  // a run that starts inside the threshold has consensus time zero
  StateXd tight = s;
  tight.positions << 0.0, 1e-3;
  const auto traj2 = pesim::simulate(tight, e, m, cfg);
  CHECK(pesim::consensus_time(traj2, 1e-2) == 0.0);

  // frozen dynamics never reach it
  const auto e0 = ScheduleEnsembleXd::shared(pesim::make_constant(0.0, 10.0), 2);
  pesim::IntegratorSettingsXd short_cfg = cfg;
  short_cfg.max_time = 1.0;
  const auto traj3 = pesim::simulate(s, e0, m, short_cfg);
  CHECK_FALSE(pesim::consensus_time(traj3, 1e-2).has_value());

  // tighter thresholds cross later
  const auto loose = pesim::consensus_time(traj, 5e-2);
  REQUIRE(loose.has_value());
  CHECK(*loose < *t);

  CHECK_THROWS_AS(pesim::consensus_time(traj, 0.0), std::invalid_argument);
}

TEST_CASE("a frozen run rides the barrier start") {
  StateXd s;
  s.t = 0.0;
  s.positions.resize(2, 1);
  s.positions << 0.2, 1.0;
  ModelConfigXd m{InfluenceKernelXd::constant(1.0), ScalingMode::fixed};
  const auto e0 = ScheduleEnsembleXd::shared(pesim::make_constant(0.0, 2.0), 2);
  pesim::IntegratorSettingsXd cfg;
  cfg.dt = 1e-2;
  cfg.max_time = 2.0;
  const auto traj = pesim::simulate(s, e0, m, cfg);

  BarrierSpecXd spec;
  spec.alpha = 0.2;
  spec.z = 1.0;  // the top agent starts on its own barrier
  spec.theta = 0.0;
  spec.window = 1.0;
  spec.k_max = 1.0;
  const auto rep = pesim::check_barrier(traj, spec, 1);
  CHECK(rep.pass);
  CHECK(rep.margin >= 0.0);
}

TEST_CASE("two contracting agents clear the barrier with slack") {
  StateXd s;
  s.t = 0.0;
  s.positions.resize(2, 1);
  s.positions << 0.0, 1.0;
  ModelConfigXd m{InfluenceKernelXd::constant(1.0), ScalingMode::fixed};
  const auto e = ScheduleEnsembleXd::shared(pesim::make_constant(1.0, 8.0), 2);
  pesim::IntegratorSettingsXd cfg;
  cfg.dt = 1e-3;
  cfg.max_time = 8.0;
  const auto traj = pesim::simulate(s, e, m, cfg);

  // x_top(tau) = 1/2 + e^-tau / 2 beats psi(tau) = 0.8 e^-tau by at least 0.2
  BarrierSpecXd spec;
  spec.alpha = 0.0;
  spec.z = 0.8;
  spec.theta = 0.0;
  spec.window = 8.0;
  spec.k_max = 1.0;
  const auto rep = pesim::check_barrier(traj, spec, 1);
  CHECK(rep.pass);
  CHECK(rep.margin > 0.1);
}

TEST_CASE("a fabricated dip below the barrier is flagged") {
  TrajectoryXd traj;
  auto push = [&](double t, double x0, double x1) {
    Eigen::MatrixXd p(2, 1);
    p << x0, x1;
    traj.samples.push_back({t, p});
  };
  push(0.0, 0.0, 1.0);
  push(0.5, 0.0, std::exp(-0.5) - 0.1);  // sags below the sliding bound
  push(1.0, 0.0, std::exp(-1.0) - 0.1);

  // psi(tau) = e^-tau, so the second sample sits 0.1 below the bound
  BarrierSpecXd spec;
  spec.alpha = 0.0;
  spec.z = 1.0;
  spec.theta = 0.0;
  spec.window = 1.0;
  spec.k_max = 1.0;
  const auto rep = pesim::check_barrier(traj, spec, 1);
  CHECK_FALSE(rep.pass);
  REQUIRE(rep.witness_time.has_value());
  CHECK(*rep.witness_time == 0.5);
  CHECK(rep.margin < 0.0);
}

TEST_CASE("barrier preconditions are enforced") {
  auto traj = quick_run(21, 4, 0.5, 3.0);
  BarrierSpecXd spec;
  spec.alpha = 0.0;
  spec.z = 1.0;
  spec.theta = 0.0;
  spec.window = 1.0;
  spec.k_max = 1.0;

  spec.theta = 1234.0;  // no sample there
  CHECK_THROWS_AS(pesim::check_barrier(traj, spec, 0), pesim::PreconditionFailed);

  spec.theta = 0.0;
  spec.alpha = 10.0;  // everyone starts below this floor
  spec.z = 11.0;
  CHECK_THROWS_AS(pesim::check_barrier(traj, spec, 0), pesim::PreconditionFailed);

  spec.alpha = 0.0;
  spec.z = 1.0;
  CHECK_THROWS_AS(pesim::check_barrier(traj, spec, 99), std::out_of_range);
}

TEST_CASE("random runs never breach their barriers") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto traj = quick_run(1000 + seed, 5, 0.4, 8.0);
    const auto bounds =
        pesim::validate_hypotheses(traj.model, traj.state_at(0));
    const double alpha = pesim::gamma_min_1d(traj.samples.front().positions);
    for (Eigen::Index agent = 0; agent < traj.agent_count(); ++agent) {
      BarrierSpecXd spec;
      spec.alpha = alpha;
      spec.z = traj.samples.front().positions(agent, 0);
      spec.theta = 0.0;
      spec.window = 1.0;
      spec.k_max = bounds.k_max;
      CHECK(pesim::check_barrier(traj, spec, agent).pass);
    }
  }
}
