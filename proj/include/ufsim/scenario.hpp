#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ufsim/model.hpp"
#include "ufsim/types.hpp"

namespace ufsim {

class Rng;

struct Distribution {
  enum class Kind : std::uint8_t { Exponential, Constant, Uniform };
  Kind kind = Kind::Exponential;
  SimDuration mean = ms(1);  // exponential mean, or the constant value
  SimDuration lo = 0;        // uniform bounds
  SimDuration hi = 0;

  static Distribution exponential(SimDuration mean) { return {Kind::Exponential, mean, 0, 0}; }
  static Distribution constant(SimDuration v) { return {Kind::Constant, v, 0, 0}; }
  static Distribution uniform(SimDuration lo, SimDuration hi) { return {Kind::Uniform, 0, lo, hi}; }

  SimDuration sample(Rng& rng) const;
  SimDuration expected() const;
  friend bool operator==(const Distribution&, const Distribution&) = default;
};

struct BurstyParams {
  Distribution service = Distribution::exponential(ms(2));
  Distribution think = Distribution::exponential(ms(1));
  friend bool operator==(const BurstyParams&, const BurstyParams&) = default;
};

struct BoundParams {
  SimDuration iteration_work = ms(250);
  std::string label = "query";
  friend bool operator==(const BoundParams&, const BoundParams&) = default;
};

struct SpinLockParams {
  int spin_attempts_before_sleep = 100;
  SimDuration spin_cost = us(1);  // CPU time of one spin attempt
  SimDuration sleep_initial = ms(1);
  SimDuration sleep_cap = ms(100);
  int panic_threshold = 1000;
  SimDuration holder_work = sec(3);
  friend bool operator==(const SpinLockParams&, const SpinLockParams&) = default;
};

enum class WorkloadKind : std::uint8_t { Bursty, Bound, LockHolder, LockWaiter };

std::string_view to_string(WorkloadKind k);

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::Bursty;
  BurstyParams bursty;
  BoundParams bound;
  SpinLockParams lock;
  LockId lock_id = 0;
  friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

struct CgroupSpec {
  std::string name;
  std::optional<std::string> parent;
  std::int64_t weight = 100;
  int rt_priority = 0;
  friend bool operator==(const CgroupSpec&, const CgroupSpec&) = default;
};

/// `count` identical tasks; ids are assigned in declaration order.
struct TaskSpec {
  std::string name;
  int count = 1;
  std::string cgroup;
  WorkloadSpec workload;
  std::optional<std::vector<CpuId>> affinity;
  SimTime start = 0;
  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

enum class PolicyKind : std::uint8_t { Ufs, Eevdf, Idle, Fifo, Rr };

std::string_view to_string(PolicyKind p);
PolicyKind policy_from_string(std::string_view s);

struct PolicyParams {
  SimDuration rr_quantum = ms(100);
  SimDuration balance_interval = ms(100);
  double fair_server_share = 0.05;
  SimDuration fair_server_period = sec(1);
  SimDuration fair_server_grant = ms(5);
  int dispatch_retries = 8;
  int rt_priority = 99;  // real-time priority for time-sensitive cgroups
  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

struct EngineParams {
  SimDuration slice = ms(4);
  SimDuration ctx_switch_cost = us(5);
  SimDuration migration_cost = us(20);
  std::uint64_t rng_seed = 1;
  SimDuration duration = sec(60);
  SimDuration warmup = sec(5);
  friend bool operator==(const EngineParams&, const EngineParams&) = default;
};

/// Moves a task to another cgroup at a point in simulated time.
struct ReassignEvent {
  SimTime at = 0;
  TaskId task = kNoTask;
  std::string cgroup;
  friend bool operator==(const ReassignEvent&, const ReassignEvent&) = default;
};

struct ScenarioConfig {
  std::string name = "custom";
  int cpus = 1;
  std::vector<CgroupSpec> cgroups;
  std::vector<TaskSpec> tasks;
  PolicyKind policy = PolicyKind::Ufs;
  PolicyParams policy_params;
  EngineParams engine;
  bool hinting = true;
  std::vector<ReassignEvent> events;
  std::optional<std::string> report_path;
  std::optional<std::string> trace_path;

  int task_count() const;
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Parses and validates JSON. Errors carry the source line of the offending field.
ScenarioConfig parse_scenario(std::string_view json_text);
std::string scenario_to_json(const ScenarioConfig& cfg);

/// Checks every model invariant that can be decided before the run.
void validate(const ScenarioConfig& cfg);

/// A preset name or a path to a JSON file.
ScenarioConfig load_scenario(const std::string& path_or_preset);

std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
ScenarioConfig preset(const std::string& name);

/// Applies the per-policy class mapping and re-validates (e.g. IDLE needs a background tier).
ScenarioConfig with_policy(ScenarioConfig cfg, PolicyKind policy);

std::string format_duration(SimDuration d);
SimDuration parse_duration(std::string_view s);

}  // namespace ufsim
