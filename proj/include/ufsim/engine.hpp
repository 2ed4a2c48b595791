#pragma once

#include <map>
#include <memory>
#include <queue>
#include <vector>

#include "ufsim/hinting.hpp"
#include "ufsim/policy.hpp"
#include "ufsim/trace.hpp"
#include "ufsim/workload.hpp"

namespace ufsim {

struct RunResult {
  Trace trace;
  SimTime end_time = 0;
  bool panicked = false;
  std::vector<Task> tasks;  // final task states
};

/// Discrete-event simulation of one scenario under one policy.
class Engine : private Kernel {
 public:
  explicit Engine(const ScenarioConfig& cfg, std::unique_ptr<Policy> policy = nullptr);
  ~Engine() override;

  /// Runs to the configured duration, or until a task panics.
  RunResult run();

  Policy& policy() { return *policy_; }
  const CgroupTree& cgroup_tree() const { return groups_; }
  const HintMap& hints() const { return hints_; }

 private:
  enum class EvKind : std::uint8_t { Wakeup, Start, Reassign, Kick, SwitchDone, CpuTimer, PolicyTimer };
  struct Ev {
    SimTime time;
    int prio;
    std::int64_t id;
    std::uint64_t seq;
    EvKind kind;
    std::int64_t arg;
    std::uint64_t gen;
    bool operator>(const Ev& o) const {
      if (time != o.time) return time > o.time;
      if (prio != o.prio) return prio > o.prio;
      if (id != o.id) return id > o.id;
      return seq > o.seq;
    }
  };
  enum class CpuState : std::uint8_t { Idle, Switching, Running };
  struct Cpu {
    CpuState state = CpuState::Idle;
    TaskId cur = kNoTask;
    TaskId switch_prev = kNoTask;
    SimDuration switch_cost = 0;
    SimTime run_start = 0;
    SimTime slice_end = kForever;
    std::uint64_t gen = 0;
    bool resched_pending = false;
    bool in_resched = false;
    bool kicked = false;  // an idle CPU with a kick in flight is already claimed
  };
  struct TaskRt {
    std::unique_ptr<Behavior> behavior;
    Rng rng;
    SimDuration remaining = 0;
    bool last_lock_ok = false;
    int lock_failures = 0;
  };

  // Kernel
  SimTime now() const override { return now_; }
  int ncpus() const override { return static_cast<int>(cpus_.size()); }
  int ntasks() const override { return static_cast<int>(tasks_.size()); }
  TaskId current(CpuId cpu) const override;
  bool idle(CpuId cpu) const override;
  Task& task(TaskId id) override { return tasks_.at(static_cast<std::size_t>(id)); }
  const Task& task(TaskId id) const override { return tasks_.at(static_cast<std::size_t>(id)); }
  CgroupTree& cgroups() override { return groups_; }
  const CgroupTree& cgroups() const override { return groups_; }
  const EngineParams& engine_params() const override { return cfg_.engine; }
  const PolicyParams& policy_params() const override { return cfg_.policy_params; }
  void kick(CpuId cpu, KickReason reason, TaskId trigger) override;
  void note_enqueue(TaskId task, CpuId cpu, CgroupId cgroup) override;
  void diag(DiagCode code, std::int64_t value) override;

  void push(EvKind kind, SimTime at, std::int64_t id, std::int64_t arg = 0, std::uint64_t gen = 0);
  void emit(EventKind kind, CpuId cpu, std::int64_t a1 = -1, std::int64_t a2 = -1, std::int64_t a3 = -1);
  void set_state(TaskId t, TaskState s);

  void account(CpuId c);
  void reschedule(CpuId c, EnqueueReason why);
  void switch_to_next(CpuId c, TaskId prev);
  void finish_switch(CpuId c);
  void run_task(CpuId c);
  void leave_cpu(CpuId c, TaskState to);
  void on_cpu_timer(CpuId c);
  void on_kick(CpuId c, KickReason reason);
  void on_wakeup(TaskId t, EnqueueReason why);
  void on_reassign(std::size_t idx);
  bool do_try_lock(CpuId c, TaskId t, LockId lock, bool final_check);
  void do_unlock(CpuId c, TaskId t, LockId lock);
  void sync_policy_timer();

  ScenarioConfig cfg_;
  std::unique_ptr<Policy> policy_;
  CgroupTree groups_;
  std::vector<Task> tasks_;
  std::vector<TaskRt> rt_;
  std::vector<Cpu> cpus_;
  std::map<LockId, LockState> locks_;
  HintMap hints_;
  std::vector<CgroupId> reassign_targets_;
  Trace trace_;
  std::priority_queue<Ev, std::vector<Ev>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  SimTime now_ = 0;
  SimTime policy_timer_at_ = kForever;
  bool stopped_ = false;
};

/// Convenience: build, run, and return the trace of one scenario.
RunResult simulate(const ScenarioConfig& cfg);

}  // namespace ufsim
