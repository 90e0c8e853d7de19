#include "pesim/trajectory_io.hpp"

#include <array>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include "pesim/errors.hpp"
#include "pesim/format.hpp"

namespace pesim {

namespace {

constexpr const char* header = "t,agent,coord,value";

struct Row {
  double t;
  long long agent;
  long long coord;
  double value;
};

Row parse_row(const std::string& line, int line_no) {
  std::array<std::string, 4> fields;
  std::size_t start = 0;
  for (int f = 0; f < 4; ++f) {
    const std::size_t comma = line.find(',', start);
    const bool last = f == 3;
    if (last != (comma == std::string::npos))
      throw ConfigError(line_no, "trajectory row needs exactly four fields");
    fields[std::size_t(f)] =
        line.substr(start, last ? std::string::npos : comma - start);
    start = comma + 1;
  }
  try {
    Row row;
    row.t = parse_double(fields[0]);
    row.agent = parse_int64(fields[1]);
    row.coord = parse_int64(fields[2]);
    row.value = parse_double(fields[3]);
    return row;
  } catch (const std::exception& e) {
    throw ConfigError(line_no, std::string("bad trajectory row: ") + e.what());
  }
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const TrajectoryXd& traj) {
  out << header << '\n';
  for (const auto& sample : traj.samples) {
    const std::string t = format_double(sample.t);
    for (Eigen::Index i = 0; i < sample.positions.rows(); ++i) {
      for (Eigen::Index c = 0; c < sample.positions.cols(); ++c) {
        out << t << ',' << i << ',' << c << ','
            << format_double(sample.positions(i, c)) << '\n';
      }
    }
  }
}

void write_trajectory_csv(const std::string& path, const TrajectoryXd& traj) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_trajectory_csv(out, traj);
  if (!out) throw Error("failed writing " + path);
}

TrajectoryXd read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw ConfigError(1, "trajectory CSV must start with the header " +
                             std::string(header));

  // rows arrive grouped by sample; collect each group, then shape matrices
  struct Group {
    double t;
    std::vector<Row> rows;
  };
  std::vector<Group> groups;
  long long max_agent = -1;
  long long max_coord = -1;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const Row row = parse_row(line, line_no);
    if (row.agent < 0 || row.coord < 0)
      throw ConfigError(line_no, "agent and coord indices must be nonnegative");
    max_agent = std::max(max_agent, row.agent);
    max_coord = std::max(max_coord, row.coord);
    if (groups.empty() || groups.back().t != row.t) {
      if (!groups.empty() && !(row.t > groups.back().t))
        throw ConfigError(line_no, "sample times must increase strictly");
      groups.push_back({row.t, {}});
    }
    groups.back().rows.push_back(row);
  }
  if (groups.empty()) throw ConfigError(line_no, "trajectory CSV has no samples");

  const Eigen::Index agents = Eigen::Index(max_agent + 1);
  const Eigen::Index dims = Eigen::Index(max_coord + 1);
  TrajectoryXd traj;
  traj.samples.reserve(groups.size());
  for (const auto& group : groups) {
    typename TrajectoryXd::Positions positions(agents, dims);
    positions.setConstant(std::numeric_limits<double>::quiet_NaN());
    for (const Row& row : group.rows)
      positions(Eigen::Index(row.agent), Eigen::Index(row.coord)) = row.value;
    if (!positions.allFinite())
      throw ConfigError(0, "sample at t = " + format_double(group.t) +
                               " is missing agent or coordinate rows");
    traj.samples.push_back({group.t, std::move(positions)});
  }
  return traj;
}

TrajectoryXd read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return read_trajectory_csv(in);
}

}  // namespace pesim
