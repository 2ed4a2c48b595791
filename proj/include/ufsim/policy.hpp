#pragma once

#include <memory>
#include <vector>

#include "ufsim/model.hpp"
#include "ufsim/scenario.hpp"
#include "ufsim/trace.hpp"

namespace ufsim {

enum class EnqueueReason : std::uint8_t { New, Wakeup, Preempted, Expired, Migrated };

/// What a policy may observe and request from the engine.
class Kernel {
 public:
  virtual ~Kernel() = default;

  virtual SimTime now() const = 0;
  virtual int ncpus() const = 0;
  virtual int ntasks() const = 0;
  /// Task occupying the CPU (running or being switched in), or kNoTask.
  virtual TaskId current(CpuId cpu) const = 0;
  /// No occupant and no switch in progress.
  virtual bool idle(CpuId cpu) const = 0;

  virtual Task& task(TaskId id) = 0;
  virtual const Task& task(TaskId id) const = 0;
  virtual CgroupTree& cgroups() = 0;
  virtual const CgroupTree& cgroups() const = 0;

  virtual const EngineParams& engine_params() const = 0;
  virtual const PolicyParams& policy_params() const = 0;

  /// Asks `cpu` to reschedule at the current instant.
  virtual void kick(CpuId cpu, KickReason reason, TaskId trigger) = 0;
  /// Records a queue insertion: `cpu` for a local queue, `cgroup` for a group queue.
  virtual void note_enqueue(TaskId task, CpuId cpu, CgroupId cgroup) = 0;
  virtual void diag(DiagCode code, std::int64_t value) = 0;
};

/// A scheduling policy. Owns every run queue; the engine owns CPUs and tasks.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual void attach(Kernel& k) { kernel_ = &k; }

  /// Task became runnable (or was switched out while still runnable).
  virtual void enqueue(TaskId task, EnqueueReason reason) = 0;
  /// Removes a queued task; false if it was not queued.
  virtual bool dequeue(TaskId task) = 0;
  /// Chooses and removes the next task for `cpu`, or kNoTask to idle.
  virtual TaskId pick_next(CpuId cpu) = 0;
  /// `task` ran for `ran` on `cpu` since its last charge.
  virtual void charge(TaskId task, CpuId cpu, SimDuration ran) = 0;
  /// How long `task` may run on `cpu` before the engine reconsiders. kForever for none.
  virtual SimDuration slice_for(TaskId task, CpuId cpu) = 0;

  /// Earliest policy timer, kForever when none.
  virtual SimTime next_timer() const { return kForever; }
  virtual void on_timer(SimTime /*now*/) {}

  virtual void on_block(TaskId /*task*/) {}
  virtual void on_boost(TaskId /*holder*/, LockId /*lock*/, TaskId /*booster*/) {}
  virtual void on_unboost(TaskId /*holder*/) {}

 protected:
  Kernel& kernel() const { return *kernel_; }

 private:
  Kernel* kernel_ = nullptr;
};

std::unique_ptr<Policy> make_policy(PolicyKind kind);

}  // namespace ufsim
