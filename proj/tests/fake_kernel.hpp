#pragma once

#include <utility>
#include <vector>

#include "ufsim/policy.hpp"

namespace ufsim::testing {

/// Hand-driven Kernel for calling policy callbacks directly.
class FakeKernel : public Kernel {
 public:
  struct KickRecord {
    CpuId cpu;
    KickReason reason;
    TaskId trigger;
  };

  explicit FakeKernel(int ncpus) : current_(static_cast<std::size_t>(ncpus), kNoTask) {}

  CgroupId add_cgroup(const std::string& name, std::int64_t weight, int rt_priority = 0) {
    return groups_.add(name, std::nullopt, Weight(weight), rt_priority);
  }

  TaskId add_task(CgroupId cg, std::optional<CpuSet> affinity = std::nullopt) {
    Task t;
    t.id = static_cast<TaskId>(tasks_.size());
    t.cgroup = cg;
    t.state = TaskState::Runnable;
    t.affinity = affinity.value_or(CpuSet::all(ncpus()));
    tasks_.push_back(t);
    return t.id;
  }

  void run_on(CpuId cpu, TaskId t) {
    current_[static_cast<std::size_t>(cpu)] = t;
    if (t != kNoTask) {
      tasks_[static_cast<std::size_t>(t)].state = TaskState::Running;
      tasks_[static_cast<std::size_t>(t)].last_cpu = cpu;
    }
  }

  SimTime now() const override { return now_; }
  int ncpus() const override { return static_cast<int>(current_.size()); }
  int ntasks() const override { return static_cast<int>(tasks_.size()); }
  TaskId current(CpuId cpu) const override { return current_.at(static_cast<std::size_t>(cpu)); }
  bool idle(CpuId cpu) const override { return current(cpu) == kNoTask; }
  Task& task(TaskId id) override { return tasks_.at(static_cast<std::size_t>(id)); }
  const Task& task(TaskId id) const override { return tasks_.at(static_cast<std::size_t>(id)); }
  CgroupTree& cgroups() override { return groups_; }
  const CgroupTree& cgroups() const override { return groups_; }
  const EngineParams& engine_params() const override { return engine_; }
  const PolicyParams& policy_params() const override { return params_; }
  void kick(CpuId cpu, KickReason reason, TaskId trigger) override { kicks.push_back({cpu, reason, trigger}); }
  void note_enqueue(TaskId task, CpuId cpu, CgroupId cgroup) override { enqueues.push_back({task, cpu, cgroup}); }
  void diag(DiagCode code, std::int64_t value) override { diags.emplace_back(code, value); }

  SimTime now_ = 0;
  EngineParams engine_;
  PolicyParams params_;
  std::vector<KickRecord> kicks;
  struct EnqueueRecord {
    TaskId task;
    CpuId cpu;
    CgroupId cgroup;
  };
  std::vector<EnqueueRecord> enqueues;
  std::vector<std::pair<DiagCode, std::int64_t>> diags;

 private:
  CgroupTree groups_;
  std::vector<Task> tasks_;
  std::vector<TaskId> current_;
};

}  // namespace ufsim::testing
