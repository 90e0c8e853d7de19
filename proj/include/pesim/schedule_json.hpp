#pragma once

#include <string>
#include <vector>

#include "pesim/check.hpp"
#include "pesim/schedule.hpp"

namespace pesim {

/// {"breakpoints": [...], "values": [...], "horizon": t}. Round-trips
/// bit-exactly: numbers are printed with shortest round-trip precision.
std::string schedule_to_json(const WeightScheduleXd& schedule);
WeightScheduleXd schedule_from_json(const std::string& text);

/// {"agents": n, "shared": flag, "schedules": [...]}, write-only artifact.
std::string ensemble_to_json(const ScheduleEnsembleXd& ensemble);

/// {"check": name, "pass": flag, "witness_time": t or null, "margin": m}
std::string check_report_to_json(const CheckReport& report);
std::string check_reports_to_json(const std::vector<CheckReport>& reports);

}  // namespace pesim
