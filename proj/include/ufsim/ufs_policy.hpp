#pragma once

#include <map>
#include <set>
#include <vector>

#include "ufsim/policy.hpp"
#include "ufsim/runnable_tree.hpp"

namespace ufsim {

/// Two-tier scheduler. Time-sensitive (and boosted) tasks go straight to a CPU's
/// local queue; background tasks wait in per-cgroup queues that idle CPUs pull
/// from through the runnable tree.
class UfsPolicy : public Policy {
 public:
  /// Invariant checks performed inline; all counters stay zero in a correct run.
  struct Checks {
    std::uint64_t dispatches = 0;
    std::uint64_t argmin_violations = 0;
    std::uint64_t clamp_violations = 0;
    std::uint64_t monotonicity_violations = 0;
    std::uint64_t stash_violations = 0;
    std::uint64_t retry_exhausted = 0;
  };

  void attach(Kernel& k) override;
  void enqueue(TaskId task, EnqueueReason reason) override;
  bool dequeue(TaskId task) override;
  TaskId pick_next(CpuId cpu) override;
  void charge(TaskId task, CpuId cpu, SimDuration ran) override;
  SimDuration slice_for(TaskId task, CpuId cpu) override;
  void on_boost(TaskId holder, LockId lock, TaskId booster) override;
  void on_unboost(TaskId holder) override;

  CpuId select_cpu(TaskId task) const;

  const Checks& checks() const { return checks_; }
  const RunnableTree& tree() const { return tree_; }
  std::size_t local_queue_size(CpuId cpu) const { return local_.at(cpu).size(); }
  CgroupId current_cgroup(CpuId cpu) const { return current_cgroup_.at(cpu); }
  /// Ordering key: the boost vruntime while boosted, the task's own otherwise.
  std::uint64_t key_of(TaskId task) const;

 private:
  enum class Where : std::uint8_t { None, Local, Group };
  using Queue = std::set<std::pair<std::uint64_t, TaskId>>;

  bool time_sensitive(TaskId task) const;
  bool is_background_work(TaskId task) const;
  void insert_local(TaskId task, CpuId cpu, EnqueueReason reason);
  void insert_group(TaskId task);
  TaskId dispatch_background(CpuId cpu);
  TaskId steal_time_sensitive(CpuId cpu);
  Rational scaled(CgroupId cg) const { return kernel().cgroups().scaled_weight(cg); }

  std::vector<Queue> local_;
  std::map<CgroupId, Queue> group_queues_;
  RunnableTree tree_;
  std::vector<Where> where_;
  std::vector<CpuId> local_cpu_;
  std::vector<std::uint64_t> queued_key_;
  std::vector<CgroupId> current_cgroup_;
  std::map<TaskId, std::uint64_t> boost_vr_;
  std::map<TaskId, CgroupId> boost_group_;
  std::vector<std::uint64_t> last_group_vr_;
  Checks checks_;
};

}  // namespace ufsim
