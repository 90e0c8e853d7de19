#include "pesim/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pesim/errors.hpp"
#include "pesim/format.hpp"

namespace pesim {

namespace {

struct Entry {
  std::string value;
  int line;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

const std::map<std::string, std::vector<std::string>> known_keys = {
    {"model", {"agents", "dimension", "scaling"}},
    {"kernel", {"family", "value", "radii", "values", "a", "b", "p"}},
    {"schedule", {"family", "mu", "window", "shared", "value", "levels"}},
    {"integrator", {"dt", "record_every", "max_time", "stop_diameter"}},
    {"sweep", {"mu_values", "trials", "epsilon", "master_seed", "threads"}},
};

double as_double(const Entry& e, const std::string& key) {
  try {
    return parse_double(e.value);
  } catch (const std::exception&) {
    throw ConfigError(e.line, key + " wants a number, got '" + e.value + "'");
  }
}

long long as_int(const Entry& e, const std::string& key) {
  try {
    return parse_int64(e.value);
  } catch (const std::exception&) {
    throw ConfigError(e.line, key + " wants an integer, got '" + e.value + "'");
  }
}

bool as_bool(const Entry& e, const std::string& key) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  throw ConfigError(e.line, key + " wants true or false, got '" + e.value + "'");
}

std::vector<double> as_list(const Entry& e, const std::string& key) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= e.value.size()) {
    const std::size_t comma = e.value.find(',', start);
    const std::string item = trim(
        e.value.substr(start, comma == std::string::npos ? std::string::npos
                                                         : comma - start));
    if (item.empty())
      throw ConfigError(e.line, key + " has an empty list item");
    try {
      out.push_back(parse_double(item));
    } catch (const std::exception&) {
      throw ConfigError(e.line, key + " has a non-numeric item '" + item + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError(e.line, key + " wants a nonempty list");
  return out;
}

/// Returns the entry if present and marks it consumed.
class SectionReader {
 public:
  SectionReader(Section section, std::string name, int header_line)
      : section_(std::move(section)), name_(std::move(name)),
        header_line_(header_line) {}

  const Entry* take(const std::string& key) {
    const auto it = section_.find(key);
    if (it == section_.end()) return nullptr;
    consumed_.push_back(key);
    return &it->second;
  }

  /// Every key left over is incompatible with the chosen family.
  void reject_leftovers(const std::string& why) const {
    for (const auto& [key, entry] : section_) {
      if (std::find(consumed_.begin(), consumed_.end(), key) == consumed_.end())
        throw ConfigError(entry.line, "key '" + key + "' is not allowed " + why);
    }
  }

  int header_line() const { return header_line_; }

 private:
  Section section_;
  std::string name_;
  int header_line_;
  std::vector<std::string> consumed_;
};

}  // namespace

RunConfig parse_config(const std::string& text) {
  std::map<std::string, Section> sections;
  std::map<std::string, int> header_lines;

  std::istringstream in(text);
  std::string raw;
  std::string current;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    // comments run to the end of the line; values never contain # or ;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = trim(line.substr(0, comment));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(line_no, "unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      if (known_keys.find(current) == known_keys.end())
        throw ConfigError(line_no, "unknown section [" + current + "]");
      if (sections.count(current))
        throw ConfigError(line_no, "duplicate section [" + current + "]");
      sections[current];
      header_lines[current] = line_no;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line_no, "expected key = value");
    if (current.empty())
      throw ConfigError(line_no, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& allowed = known_keys.at(current);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(line_no, "unknown key '" + key + "' in [" + current + "]");
    if (sections[current].count(key))
      throw ConfigError(line_no, "duplicate key '" + key + "'");
    if (value.empty()) throw ConfigError(line_no, "key '" + key + "' has no value");
    sections[current][key] = Entry{value, line_no};
  }

  RunConfig config;

  if (auto it = sections.find("model"); it != sections.end()) {
    config.has_model = true;
    SectionReader model(it->second, "model", header_lines["model"]);
    if (const Entry* e = model.take("agents")) {
      const long long n = as_int(*e, "agents");
      if (n < 2) throw ConfigError(e->line, "agents must be at least 2");
      config.agents = Eigen::Index(n);
    }
    if (const Entry* e = model.take("dimension")) {
      const long long d = as_int(*e, "dimension");
      if (d < 1) throw ConfigError(e->line, "dimension must be at least 1");
      config.dimension = Eigen::Index(d);
    }
    if (const Entry* e = model.take("scaling")) {
      if (e->value == "fixed")
        config.scaling = ScalingMode::fixed;
      else if (e->value == "rescaled")
        config.scaling = ScalingMode::rescaled;
      else
        throw ConfigError(e->line, "scaling must be fixed or rescaled");
    }
  }

  if (auto it = sections.find("kernel"); it != sections.end()) {
    config.has_kernel = true;
    SectionReader kernel(it->second, "kernel", header_lines["kernel"]);
    std::string family = "constant";
    int family_line = kernel.header_line();
    if (const Entry* e = kernel.take("family")) {
      family = e->value;
      family_line = e->line;
    }
    try {
      if (family == "constant") {
        double value = 1.0;
        if (const Entry* e = kernel.take("value")) value = as_double(*e, "value");
        kernel.reject_leftovers("for the constant kernel family");
        config.kernel = InfluenceKernelXd::constant(value);
      } else if (family == "piecewise_linear") {
        const Entry* radii = kernel.take("radii");
        const Entry* values = kernel.take("values");
        if (!radii || !values)
          throw ConfigError(family_line,
                            "piecewise_linear needs both radii and values");
        kernel.reject_leftovers("for the piecewise_linear kernel family");
        config.kernel = InfluenceKernelXd::piecewise_linear(
            as_list(*radii, "radii"), as_list(*values, "values"));
      } else if (family == "rational_decay") {
        double a = 1.0, b = 1.0, p = 1.0;
        if (const Entry* e = kernel.take("a")) a = as_double(*e, "a");
        if (const Entry* e = kernel.take("b")) b = as_double(*e, "b");
        if (const Entry* e = kernel.take("p")) p = as_double(*e, "p");
        kernel.reject_leftovers("for the rational_decay kernel family");
        config.kernel = InfluenceKernelXd::rational_decay(a, b, p);
      } else {
        throw ConfigError(family_line, "unknown kernel family '" + family + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(family_line, std::string("invalid kernel: ") + e.what());
    }
  }

  if (auto it = sections.find("schedule"); it != sections.end()) {
    config.has_schedule = true;
    SectionReader schedule(it->second, "schedule", header_lines["schedule"]);
    std::string family = "duty_cycle_random_phase";
    int family_line = schedule.header_line();
    if (const Entry* e = schedule.take("family")) {
      family = e->value;
      family_line = e->line;
    }
    if (family == "constant")
      config.schedule_family = ScheduleFamily::constant;
    else if (family == "duty_cycle_random_phase")
      config.schedule_family = ScheduleFamily::duty_cycle_random_phase;
    else if (family == "random_blackout")
      config.schedule_family = ScheduleFamily::random_blackout;
    else if (family == "random_levels")
      config.schedule_family = ScheduleFamily::random_levels;
    else
      throw ConfigError(family_line, "unknown schedule family '" + family + "'");

    if (const Entry* e = schedule.take("mu")) {
      config.mu = as_double(*e, "mu");
      if (!(config.mu > 0)) throw ConfigError(e->line, "mu must be positive");
    }
    if (const Entry* e = schedule.take("window")) {
      config.window = as_double(*e, "window");
      if (!(config.window > 0))
        throw ConfigError(e->line, "window must be positive");
    }
    if (const Entry* e = schedule.take("shared"))
      config.shared_schedule = as_bool(*e, "shared");
    if (const Entry* e = schedule.take("value")) {
      if (config.schedule_family != ScheduleFamily::constant)
        throw ConfigError(e->line, "value applies to the constant family only");
      const double v = as_double(*e, "value");
      if (!(v >= 0 && v <= 1))
        throw ConfigError(e->line, "value must lie in [0, 1]");
      config.constant_value = v;
    }
    if (const Entry* e = schedule.take("levels")) {
      if (config.schedule_family != ScheduleFamily::random_levels)
        throw ConfigError(e->line, "levels apply to the random_levels family only");
      config.levels = as_list(*e, "levels");
      for (const double v : config.levels)
        if (!(v >= 0 && v <= 1))
          throw ConfigError(e->line, "levels must lie in [0, 1]");
    }
    if (!(config.mu <= config.window))
      throw ConfigError(schedule.header_line(), "mu must not exceed window");
    schedule.reject_leftovers("here");
  }

  if (auto it = sections.find("integrator"); it != sections.end()) {
    config.has_integrator = true;
    SectionReader integ(it->second, "integrator", header_lines["integrator"]);
    if (const Entry* e = integ.take("dt")) {
      config.integrator.dt = as_double(*e, "dt");
      if (!(config.integrator.dt > 0))
        throw ConfigError(e->line, "dt must be positive");
    }
    if (const Entry* e = integ.take("record_every")) {
      config.integrator.record_every = as_int(*e, "record_every");
      if (config.integrator.record_every < 1)
        throw ConfigError(e->line, "record_every must be at least 1");
    }
    if (const Entry* e = integ.take("max_time")) {
      config.integrator.max_time = as_double(*e, "max_time");
      if (!(config.integrator.max_time > 0))
        throw ConfigError(e->line, "max_time must be positive");
    }
    if (const Entry* e = integ.take("stop_diameter")) {
      config.integrator.stop_diameter = as_double(*e, "stop_diameter");
      if (!(config.integrator.stop_diameter >= 0))
        throw ConfigError(e->line, "stop_diameter must be nonnegative");
    }
  }

  if (auto it = sections.find("sweep"); it != sections.end()) {
    config.has_sweep = true;
    SectionReader sweep(it->second, "sweep", header_lines["sweep"]);
    if (const Entry* e = sweep.take("mu_values")) {
      config.mu_values = as_list(*e, "mu_values");
      for (const double mu : config.mu_values)
        if (!(mu > 0)) throw ConfigError(e->line, "mu_values must be positive");
    }
    if (const Entry* e = sweep.take("trials")) {
      const long long n = as_int(*e, "trials");
      if (n < 1) throw ConfigError(e->line, "trials must be at least 1");
      config.trials = int(n);
    }
    if (const Entry* e = sweep.take("epsilon")) {
      config.epsilon = as_double(*e, "epsilon");
      if (!(config.epsilon > 0))
        throw ConfigError(e->line, "epsilon must be positive");
    }
    if (const Entry* e = sweep.take("master_seed")) {
      const long long s = as_int(*e, "master_seed");
      if (s < 0) throw ConfigError(e->line, "master_seed must be nonnegative");
      config.master_seed = std::uint64_t(s);
    }
    if (const Entry* e = sweep.take("threads")) {
      const long long s = as_int(*e, "threads");
      if (s < 0) throw ConfigError(e->line, "threads must be nonnegative");
      config.threads = int(s);
    }
  }

  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

namespace {

std::string list_string(const std::vector<double>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ", ";
    out += format_double(values[k]);
  }
  return out;
}

}  // namespace

std::string serialize_config(const RunConfig& config) {
  std::string out;
  out += "[model]\n";
  out += "agents = " + std::to_string(config.agents) + "\n";
  out += "dimension = " + std::to_string(config.dimension) + "\n";
  out += std::string("scaling = ") +
         (config.scaling == ScalingMode::fixed ? "fixed" : "rescaled") + "\n";

  out += "\n[kernel]\n";
  switch (config.kernel.family()) {
    case InfluenceKernelXd::Family::constant:
      out += "family = constant\n";
      out += "value = " + format_double(config.kernel.constant_value()) + "\n";
      break;
    case InfluenceKernelXd::Family::piecewise_linear:
      out += "family = piecewise_linear\n";
      out += "radii = " + list_string(config.kernel.knot_radii()) + "\n";
      out += "values = " + list_string(config.kernel.knot_values()) + "\n";
      break;
    case InfluenceKernelXd::Family::rational_decay:
      out += "family = rational_decay\n";
      out += "a = " + format_double(config.kernel.decay_a()) + "\n";
      out += "b = " + format_double(config.kernel.decay_b()) + "\n";
      out += "p = " + format_double(config.kernel.decay_p()) + "\n";
      break;
  }

  out += "\n[schedule]\n";
  switch (config.schedule_family) {
    case ScheduleFamily::constant:
      out += "family = constant\n";
      break;
    case ScheduleFamily::duty_cycle_random_phase:
      out += "family = duty_cycle_random_phase\n";
      break;
    case ScheduleFamily::random_blackout:
      out += "family = random_blackout\n";
      break;
    case ScheduleFamily::random_levels:
      out += "family = random_levels\n";
      break;
  }
  out += "mu = " + format_double(config.mu) + "\n";
  out += "window = " + format_double(config.window) + "\n";
  out += std::string("shared = ") + (config.shared_schedule ? "true" : "false") + "\n";
  if (config.schedule_family == ScheduleFamily::constant && config.constant_value)
    out += "value = " + format_double(*config.constant_value) + "\n";
  if (config.schedule_family == ScheduleFamily::random_levels)
    out += "levels = " + list_string(config.levels) + "\n";

  out += "\n[integrator]\n";
  out += "dt = " + format_double(config.integrator.dt) + "\n";
  out += "record_every = " + std::to_string(config.integrator.record_every) + "\n";
  out += "max_time = " + format_double(config.integrator.max_time) + "\n";
  out += "stop_diameter = " + format_double(config.integrator.stop_diameter) + "\n";

  out += "\n[sweep]\n";
  out += "mu_values = " + list_string(config.mu_values) + "\n";
  out += "trials = " + std::to_string(config.trials) + "\n";
  out += "epsilon = " + format_double(config.epsilon) + "\n";
  out += "master_seed = " + std::to_string(config.master_seed) + "\n";
  out += "threads = " + std::to_string(config.threads) + "\n";
  return out;
}

ModelConfigXd make_model(const RunConfig& config) {
  return ModelConfigXd{config.kernel, config.scaling};
}

SweepSpec make_sweep_spec(const RunConfig& config) {
  SweepSpec spec;
  spec.mu_values = config.mu_values;
  spec.n_trials = config.trials;
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
  spec.threads = config.threads;
  validate(spec);
  return spec;
}

}  // namespace pesim
