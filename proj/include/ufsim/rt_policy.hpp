#pragma once

#include <deque>
#include <map>
#include <vector>

#include "ufsim/eevdf_policy.hpp"

namespace ufsim {

/// Real-time FIFO or round-robin for time-sensitive cgroups, with background
/// tasks in the normal class (the EEVDF model) and a per-CPU fair server that
/// reserves a slice of every period for normal tasks starved by real-time work.
class RtPolicy : public Policy {
 public:
  explicit RtPolicy(bool round_robin) : rr_(round_robin) {}

  void attach(Kernel& k) override;
  void enqueue(TaskId task, EnqueueReason reason) override;
  bool dequeue(TaskId task) override;
  TaskId pick_next(CpuId cpu) override;
  void charge(TaskId task, CpuId cpu, SimDuration ran) override;
  SimDuration slice_for(TaskId task, CpuId cpu) override;
  SimTime next_timer() const override;
  void on_timer(SimTime now) override;
  void on_block(TaskId task) override;

  /// Static priority 1..99, or 0 for a normal-class task.
  int priority(TaskId task) const;
  CpuId select_cpu(TaskId task) const;
  SimDuration normal_runtime(CpuId cpu) const { return normal_ran_.at(static_cast<std::size_t>(cpu)); }
  bool server_active(CpuId cpu) const { return server_budget_.at(static_cast<std::size_t>(cpu)) > 0; }

 private:
  using PrioQueues = std::map<int, std::deque<TaskId>, std::greater<>>;

  bool is_rt(TaskId t) const { return t != kNoTask && priority(t) > 0; }
  int top_priority(CpuId cpu) const;
  SimDuration grant_interval() const;

  bool rr_;
  EevdfPolicy normal_;
  std::vector<PrioQueues> rt_;
  std::vector<CpuId> queued_on_;
  std::vector<SimDuration> quantum_left_;
  std::vector<SimDuration> normal_ran_;
  std::vector<SimDuration> server_budget_;
  SimTime window_start_ = 0;
  SimTime next_grant_ = kForever;
};

}  // namespace ufsim
