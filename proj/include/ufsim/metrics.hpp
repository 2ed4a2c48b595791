#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ufsim/scenario.hpp"
#include "ufsim/trace.hpp"

namespace ufsim {

/// Nearest-rank percentile of an ascending sample; `per_mille` 950 is p95, 999 is p99.9.
std::optional<SimDuration> percentile(const std::vector<SimDuration>& sorted, unsigned per_mille);

struct GroupStats {
  std::uint64_t completed = 0;
  double throughput = 0;  // requests per second of measured time
  std::optional<double> mean_latency;  // ns
  std::optional<SimDuration> p50, p95, p999;
  std::optional<SimDuration> wakeup_p999;
  SimDuration cpu_time = 0;
};

struct CpuStats {
  std::map<std::string, SimDuration> busy;  // by workload group
  SimDuration idle = 0;
  SimDuration overhead = 0;
  SimDuration total() const;
};

struct MetricsReport {
  std::string scenario;
  std::string policy;
  SimTime window_start = 0;
  SimTime window_end = 0;
  std::map<std::string, GroupStats> workloads;  // by task group name
  std::map<std::string, GroupStats> cgroups;
  std::vector<CpuStats> cpus;
  std::uint64_t migrations = 0;
  std::uint64_t boosts = 0;
  std::uint64_t unboosts = 0;
  std::uint64_t panics = 0;
  std::optional<std::int64_t> panic_failures;
  std::uint64_t dispatch_retry_exhausted = 0;
  std::uint64_t boost_leaks = 0;

  SimDuration measured() const { return window_end - window_start; }
  /// Busy time of `workload` on each CPU, scaled so the busiest CPU reads 100.
  std::vector<double> normalized_utilization(const std::string& workload) const;
  std::string to_json() const;
  std::string to_csv() const;
};

/// Everything is derived from the trace; the config only supplies names, the CPU
/// count, and the measurement window.
MetricsReport compute_metrics(const Trace& trace, const ScenarioConfig& cfg);

/// Per-CPU busy time by workload group over [from, to), from switch events alone.
std::vector<CpuStats> attribute_cpu_time(const Trace& trace, const ScenarioConfig& cfg, SimTime from,
                                         SimTime to);

/// Scales so the largest value is 100; all zeros stay zero.
std::vector<double> normalize_to_max(const std::vector<SimDuration>& v);

}  // namespace ufsim
