#include "pesim/schedule_json.hpp"

#include "json.hpp"

#include "pesim/errors.hpp"

namespace pesim {

namespace {

using nlohmann::json;

json schedule_to_json_value(const WeightScheduleXd& schedule) {
  return json{{"breakpoints", schedule.breakpoints()},
              {"values", schedule.values()},
              {"horizon", schedule.horizon()}};
}

json check_report_to_json_value(const CheckReport& report) {
  json j{{"check", report.check}, {"pass", report.pass}, {"margin", report.margin}};
  if (report.witness_time)
    j["witness_time"] = *report.witness_time;
  else
    j["witness_time"] = nullptr;
  return j;
}

}  // namespace

std::string schedule_to_json(const WeightScheduleXd& schedule) {
  return schedule_to_json_value(schedule).dump();
}

WeightScheduleXd schedule_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("schedule JSON is malformed: ") + e.what());
  }
  try {
    return WeightScheduleXd(j.at("breakpoints").get<std::vector<double>>(),
                            j.at("values").get<std::vector<double>>(),
                            j.at("horizon").get<double>());
  } catch (const json::exception& e) {
    throw Error(std::string("schedule JSON is missing fields: ") + e.what());
  }
}

std::string ensemble_to_json(const ScheduleEnsembleXd& ensemble) {
  json schedules = json::array();
  for (const auto& s : ensemble.schedules())
    schedules.push_back(schedule_to_json_value(s));
  return json{{"agents", ensemble.agent_count()},
              {"shared", ensemble.is_shared()},
              {"schedules", std::move(schedules)}}
      .dump();
}

std::string check_report_to_json(const CheckReport& report) {
  return check_report_to_json_value(report).dump();
}

std::string check_reports_to_json(const std::vector<CheckReport>& reports) {
  json all = json::array();
  for (const auto& r : reports) all.push_back(check_report_to_json_value(r));
  return all.dump(2);
}

}  // namespace pesim
