#pragma once

#include <optional>
#include <string>

#include "pesim/errors.hpp"

namespace pesim {

/// Outcome of a runtime invariant check. `margin` is the tightest slack
/// observed (negative when the check failed); `witness_time` points at the
/// offending sample when there is one.
struct CheckReport {
  std::string check;
  bool pass = true;
  std::optional<double> witness_time;
  double margin = 0;
  std::string detail;
};

inline void require(const CheckReport& report) {
  if (!report.pass)
    throw InvariantBreach(report.check + " failed: " + report.detail);
}

}  // namespace pesim
