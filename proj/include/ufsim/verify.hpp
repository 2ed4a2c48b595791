#pragma once

#include <string>
#include <vector>

#include "ufsim/metrics.hpp"
#include "ufsim/scenario.hpp"
#include "ufsim/trace.hpp"

namespace ufsim {

struct Violation {
  SimTime time = 0;
  std::string what;
};

/// No CPU sits idle for longer than one context switch while a queued task
/// that may run there waits.
std::vector<Violation> check_work_conservation(const Trace& trace, const ScenarioConfig& cfg);

/// No unboosted background task is switched in on a CPU while a time-sensitive
/// task that may run there is waiting, either queued on that CPU or not yet queued anywhere.
std::vector<Violation> check_tier_precedence(const Trace& trace, const ScenarioConfig& cfg);

/// Per CPU, attributed + idle + overhead time equals the run length, every switch
/// continues from the CPU's previous occupant, and no switch falls after the run.
std::vector<Violation> check_time_closure(const Trace& trace, const ScenarioConfig& cfg);

/// p50 <= p95 <= p99.9 for every group with samples.
std::vector<Violation> check_percentiles(const MetricsReport& report);

}  // namespace ufsim
