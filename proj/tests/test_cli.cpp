#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string bin() {
  const char* p = std::getenv("PESIM_BIN");
  REQUIRE_MESSAGE(p != nullptr, "PESIM_BIN must point at the cli binary");
  return p;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("pesim_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd =
      bin() + " " + args + " >" + out.string() + " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* const base_config =
    "[model]\n"
    "agents = 5\n"
    "dimension = 1\n"
    "scaling = fixed\n"
    "[kernel]\n"
    "family = rational_decay\n"
    "a = 1\n"
    "b = 1\n"
    "p = 1\n"
    "[schedule]\n"
    "family = duty_cycle_random_phase\n"
    "mu = 0.5\n"
    "window = 1\n"
    "shared = false\n"
    "[integrator]\n"
    "dt = 0.01\n"
    "record_every = 1\n"
    "max_time = 40\n"
    "stop_diameter = 0.01\n"
    "[sweep]\n"
    "mu_values = 1, 0.5\n"
    "trials = 5\n"
    "epsilon = 0.01\n"
    "master_seed = 3\n"
    "threads = 1\n";

}  // namespace

TEST_CASE("simulate writes the full artifact set") {
  const auto dir = fresh_dir("simulate");
  write_file(dir / "run.ini", base_config);
  const auto r = run("simulate --config " + (dir / "run.ini").string() +
                         " --out " + dir.string(),
                     dir);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir / "trajectory.csv"));
  CHECK(fs::exists(dir / "observables.csv"));
  CHECK(fs::exists(dir / "schedules.json"));
  CHECK(fs::exists(dir / "trajectory.svg"));
  CHECK(r.out.find("consensus time") != std::string::npos);

  const auto obs = slurp(dir / "observables.csv");
  CHECK(obs.rfind("t,diameter,gamma_max,gamma_min", 0) == 0);

  // the produced trajectory passes its own verification battery
  const auto v = run("verify " + (dir / "trajectory.csv").string() +
                         " --config " + (dir / "run.ini").string(),
                     dir);
  CHECK(v.exit_code == 0);
  CHECK(v.out.find("\"pass\": true") != std::string::npos);
  CHECK(v.out.find("diameter_monotone") != std::string::npos);
  CHECK(v.out.find("barrier") != std::string::npos);
}

TEST_CASE("seed and mu overrides change the run") {
  const auto dir = fresh_dir("overrides");
  write_file(dir / "run.ini", base_config);
  const auto a = run("simulate --config " + (dir / "run.ini").string() +
                         " --out " + dir.string() + " --seed 1",
                     dir);
  const auto csv_a = slurp(dir / "trajectory.csv");
  const auto b = run("simulate --config " + (dir / "run.ini").string() +
                         " --out " + dir.string() + " --seed 2",
                     dir);
  const auto csv_b = slurp(dir / "trajectory.csv");
  const auto a2 = run("simulate --config " + (dir / "run.ini").string() +
                          " --out " + dir.string() + " --seed 1",
                      dir);
  const auto csv_a2 = slurp(dir / "trajectory.csv");
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  CHECK(csv_a != csv_b);
  CHECK(csv_a == csv_a2);

  const auto m = run("simulate --config " + (dir / "run.ini").string() +
                         " --out " + dir.string() + " --mu 2",
                     dir);
  CHECK(m.exit_code == 2);  // mu above the window
}

TEST_CASE("a dark schedule yields a frozen trajectory") {
  const auto dir = fresh_dir("dark");
  std::string cfg = base_config;
  const auto pos = cfg.find("family = duty_cycle_random_phase");
  cfg.replace(pos, std::string("family = duty_cycle_random_phase").size(),
              "family = constant\nvalue = 0");
  // drop the early stop so the run spans the full horizon
  const auto stop = cfg.find("stop_diameter = 0.01");
  cfg.replace(stop, std::string("stop_diameter = 0.01").size(), "stop_diameter = 0");
  const auto tmax = cfg.find("max_time = 40");
  cfg.replace(tmax, std::string("max_time = 40").size(), "max_time = 2");
  write_file(dir / "dark.ini", cfg);
  const auto r = run("simulate --config " + (dir / "dark.ini").string() +
                         " --out " + dir.string(),
                     dir);
  CHECK(r.exit_code == 0);

  // first and last sample of every agent agree
  std::istringstream csv(slurp(dir / "trajectory.csv"));
  std::string line;
  std::getline(csv, line);  // header
  std::vector<std::string> rows;
  while (std::getline(csv, line))
    if (!line.empty()) rows.push_back(line);
  REQUIRE(rows.size() >= 10);
  for (int agent = 0; agent < 5; ++agent) {
    const auto first = rows[std::size_t(agent)];
    const auto last = rows[rows.size() - 5 + std::size_t(agent)];
    CHECK(first.substr(first.rfind(',')) == last.substr(last.rfind(',')));
  }
}

TEST_CASE("config errors exit with code two") {
  const auto dir = fresh_dir("config_errors");

  write_file(dir / "nokernel.ini",
             "[model]\nagents = 5\n[schedule]\nmu = 0.5\n[integrator]\ndt = 0.01\n");
  const auto r1 = run("simulate --config " + (dir / "nokernel.ini").string() +
                          " --out " + dir.string(),
                      dir);
  CHECK(r1.exit_code == 2);
  CHECK(r1.err.find("kernel") != std::string::npos);

  write_file(dir / "broken.ini", "[model]\nagents = banana\n");
  const auto r2 = run("simulate --config " + (dir / "broken.ini").string() +
                          " --out " + dir.string(),
                      dir);
  CHECK(r2.exit_code == 2);
  CHECK(r2.err.find("line 2") != std::string::npos);

  const auto r3 = run("simulate --config " + (dir / "missing.ini").string() +
                          " --out " + dir.string(),
                      dir);
  CHECK(r3.exit_code == 2);

  const auto r4 = run("simulate --frobnicate", dir);
  CHECK(r4.exit_code == 2);

  const auto r5 = run("", dir);
  CHECK(r5.exit_code == 2);
}

TEST_CASE("verify rejects corrupted trajectories with exit four") {
  const auto dir = fresh_dir("verify_corrupt");
  write_file(dir / "run.ini", base_config);
  const auto r = run("simulate --config " + (dir / "run.ini").string() +
                         " --out " + dir.string(),
                     dir);
  REQUIRE(r.exit_code == 0);

  // teleport one agent outward near the end of the run
  std::istringstream csv(slurp(dir / "trajectory.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  REQUIRE(lines.size() > 20);
  const std::size_t target = lines.size() - 3;
  const auto tail = lines[target].rfind(',');
  lines[target] = lines[target].substr(0, tail) + ",50";
  std::ostringstream rebuilt;
  for (const auto& l : lines) rebuilt << l << "\n";
  write_file(dir / "corrupt.csv", rebuilt.str());

  const auto v = run("verify " + (dir / "corrupt.csv").string() + " --config " +
                         (dir / "run.ini").string(),
                     dir);
  CHECK(v.exit_code == 4);
  CHECK(v.err.find("diameter_monotone") != std::string::npos);
  CHECK(v.out.find("\"pass\": false") != std::string::npos);

  // unreadable and empty inputs are input errors instead
  write_file(dir / "empty.csv", "");
  const auto e = run("verify " + (dir / "empty.csv").string() + " --config " +
                         (dir / "run.ini").string(),
                     dir);
  CHECK(e.exit_code == 2);
}

TEST_CASE("sweep writes table fit and plot") {
  const auto dir = fresh_dir("sweep");
  write_file(dir / "run.ini", base_config);
  const auto r = run("sweep --config " + (dir / "run.ini").string() + " --out " +
                         dir.string(),
                     dir);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir / "sweep.csv"));
  CHECK(fs::exists(dir / "sweep_fit.json"));
  CHECK(fs::exists(dir / "sweep.svg"));
  const auto csv = slurp(dir / "sweep.csv");
  CHECK(csv.rfind("mu,mean_time,std,min,max,n_unconverged", 0) == 0);
  const auto fit = slurp(dir / "sweep_fit.json");
  CHECK(fit.find("\"slope\"") != std::string::npos);

  // trial override shrinks the work and still succeeds
  const auto t = run("sweep --config " + (dir / "run.ini").string() + " --out " +
                         dir.string() + " --trials 2",
                     dir);
  CHECK(t.exit_code == 0);
}

TEST_CASE("single mu sweeps warn and skip the fit") {
  const auto dir = fresh_dir("sweep_single");
  std::string cfg = base_config;
  const auto pos = cfg.find("mu_values = 1, 0.5");
  cfg.replace(pos, std::string("mu_values = 1, 0.5").size(), "mu_values = 0.5");
  write_file(dir / "run.ini", cfg);
  const auto r = run("sweep --config " + (dir / "run.ini").string() + " --out " +
                         dir.string(),
                     dir);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir / "sweep.csv"));
  CHECK_FALSE(fs::exists(dir / "sweep_fit.json"));
  CHECK(r.err.find("no log-log fit") != std::string::npos);
}

TEST_CASE("help exits cleanly") {
  const auto dir = fresh_dir("help");
  const auto r = run("--help", dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("simulate") != std::string::npos);
  CHECK(r.out.find("sweep") != std::string::npos);
  CHECK(r.out.find("verify") != std::string::npos);
}
