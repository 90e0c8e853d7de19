#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pesim/config.hpp"
#include "pesim/dynamics.hpp"
#include "pesim/errors.hpp"
#include "pesim/experiments.hpp"
#include "pesim/format.hpp"
#include "pesim/integrator.hpp"
#include "pesim/observables.hpp"
#include "pesim/schedule_json.hpp"
#include "pesim/svg.hpp"
#include "pesim/trajectory_io.hpp"
#include "pesim/verify.hpp"

namespace {

namespace fs = std::filesystem;
using namespace pesim;

constexpr int exit_config = 2;
constexpr int exit_simulation = 3;
constexpr int exit_verify = 4;

void require_section(bool present, const char* name) {
  if (!present)
    throw ConfigError(std::string("missing required section [") + name + "]");
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

/// The fields build_ensemble and draw_initial_positions read, taken from the
/// config; mu_values is left untouched on purpose (single runs do not sweep).
SweepSpec single_run_spec(const RunConfig& config) {
  SweepSpec spec;
  spec.mu_values = {config.mu};
  spec.agents = config.agents;
  spec.dimension = config.dimension;
  spec.window = config.window;
  spec.epsilon = config.epsilon;
  spec.kernel = config.kernel;
  spec.scaling = config.scaling;
  spec.family = config.schedule_family;
  spec.shared_schedule = config.shared_schedule;
  spec.master_seed = config.master_seed;
  spec.max_time = config.integrator.max_time;
  spec.dt = config.integrator.dt;
  spec.record_every = config.integrator.record_every;
  spec.constant_value = config.constant_value;
  spec.levels = config.levels;
  return spec;
}

std::string observables_csv(const TrajectoryXd& traj) {
  const bool scalar = traj.dimension() == 1;
  std::string out = scalar ? "t,diameter,gamma_max,gamma_min\n"
                           : "t,diameter,gamma_max\n";
  for (const auto& sample : traj.samples) {
    out += format_double(sample.t);
    out += ',';
    out += format_double(diameter(sample.positions));
    out += ',';
    out += format_double(gamma_max(sample.positions));
    if (scalar) {
      out += ',';
      out += format_double(gamma_min_1d(sample.positions));
    }
    out += '\n';
  }
  return out;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const std::optional<std::uint64_t>& seed,
                 const std::optional<double>& mu) {
  RunConfig config = load_config(config_path);
  require_section(config.has_model, "model");
  require_section(config.has_kernel, "kernel");
  require_section(config.has_schedule, "schedule");
  require_section(config.has_integrator, "integrator");
  if (seed) config.master_seed = *seed;
  if (mu) {
    if (!(*mu > 0) || !(*mu <= config.window))
      throw ConfigError("--mu must lie in (0, window]");
    config.mu = *mu;
  }

  const SweepSpec spec = single_run_spec(config);
  const ModelConfigXd model = make_model(config);
  const StateXd initial = draw_initial_positions(spec, 0);
  validate_hypotheses(model, initial);
  const ScheduleEnsembleXd ensemble = build_ensemble(spec, config.mu, 0);
  IntegratorSettingsXd settings = config.integrator;
  validate(settings, config.window);

  const TrajectoryXd traj = simulate(initial, ensemble, model, settings);

  fs::create_directories(out_dir);
  write_trajectory_csv((fs::path(out_dir) / "trajectory.csv").string(), traj);
  write_file(fs::path(out_dir) / "observables.csv", observables_csv(traj));
  write_file(fs::path(out_dir) / "schedules.json", ensemble_to_json(ensemble));
  if (traj.dimension() == 1)
    write_file(fs::path(out_dir) / "trajectory.svg", svg_trajectory_plot(traj));

  std::cout << "samples: " << traj.samples.size() << "\n";
  std::cout << "final time: " << format_double(traj.samples.back().t) << "\n";
  std::cout << "final diameter: "
            << format_double(diameter(traj.samples.back().positions)) << "\n";
  if (const auto time = consensus_time(traj, config.epsilon))
    std::cout << "consensus time (epsilon = " << format_double(config.epsilon)
              << "): " << format_double(*time) << "\n";
  else
    std::cout << "consensus not reached at epsilon = "
              << format_double(config.epsilon) << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              const std::optional<std::uint64_t>& seed,
              const std::optional<int>& trials) {
  RunConfig config = load_config(config_path);
  require_section(config.has_model, "model");
  require_section(config.has_kernel, "kernel");
  require_section(config.has_schedule, "schedule");
  require_section(config.has_integrator, "integrator");
  require_section(config.has_sweep, "sweep");
  if (seed) config.master_seed = *seed;
  if (trials) {
    if (*trials < 1) throw ConfigError("--trials must be at least 1");
    config.trials = *trials;
  }

  SweepSpec spec;
  try {
    spec = make_sweep_spec(config);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const SweepResult result = run_sweep(spec);

  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "sweep.csv", sweep_csv(result));
  write_file(fs::path(out_dir) / "sweep.svg", svg_sweep_plot(result));
  if (result.fit)
    write_file(fs::path(out_dir) / "sweep_fit.json", fit_json(*result.fit));
  else
    std::cerr << "warning: single mu value, no log-log fit\n";

  std::cout << sweep_csv(result);
  if (result.fit)
    std::cout << "fit: slope " << format_double(result.fit->slope) << ", r^2 "
              << format_double(result.fit->r_squared) << "\n";
  return 0;
}

int cmd_verify(const std::string& trajectory_path, const std::string& config_path) {
  const RunConfig config = load_config(config_path);
  require_section(config.has_model, "model");
  require_section(config.has_kernel, "kernel");
  require_section(config.has_schedule, "schedule");

  const TrajectoryXd traj = read_trajectory_csv(trajectory_path);
  const std::vector<CheckReport> reports =
      verify_trajectory(traj, make_model(config), config.window);

  std::cout << check_reports_to_json(reports) << "\n";
  for (const auto& report : reports) {
    if (!report.pass) {
      std::cerr << "verification failed: " << report.check << " (" << report.detail
                << ")\n";
      return exit_verify;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"consensus dynamics under persistently exciting weights"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string trajectory_path;
  std::uint64_t seed_value = 0;
  double mu_value = 0;
  int trials_value = 0;

  auto* sim = app.add_subcommand("simulate", "run one simulation, write its artifacts");
  sim->add_option("--config", config_path, "config file")->required();
  sim->add_option("--out", out_dir, "output directory (default .)");
  auto* sim_seed = sim->add_option("--seed", seed_value, "override master_seed");
  auto* sim_mu = sim->add_option("--mu", mu_value, "override the schedule mu");

  auto* sweep = app.add_subcommand("sweep", "run the Monte Carlo sweep");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--out", out_dir, "output directory (default .)");
  auto* sweep_seed = sweep->add_option("--seed", seed_value, "override master_seed");
  auto* sweep_trials = sweep->add_option("--trials", trials_value, "override trials");

  auto* verify = app.add_subcommand("verify", "replay invariant checks on a trajectory CSV");
  verify->add_option("trajectory", trajectory_path, "trajectory CSV path")->required();
  verify->add_option("--config", config_path, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(config_path, out_dir,
                          sim_seed->count() ? std::optional(seed_value) : std::nullopt,
                          sim_mu->count() ? std::optional(mu_value) : std::nullopt);
    }
    if (sweep->parsed()) {
      return cmd_sweep(config_path, out_dir,
                       sweep_seed->count() ? std::optional(seed_value) : std::nullopt,
                       sweep_trials->count() ? std::optional(trials_value) : std::nullopt);
    }
    return cmd_verify(trajectory_path, config_path);
  } catch (const ConfigError& e) {
    if (e.line() > 0)
      std::cerr << "config error (line " << e.line() << "): " << e.what() << "\n";
    else
      std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    try {
      std::rethrow_if_nested(e);
    } catch (const std::exception& nested) {
      std::cerr << "  caused by: " << nested.what() << "\n";
    } catch (...) {
    }
    return exit_simulation;
  }
}
