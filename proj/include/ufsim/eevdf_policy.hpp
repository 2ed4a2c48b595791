#pragma once

#include <functional>
#include <vector>

#include "ufsim/policy.hpp"

namespace ufsim {

/// EEVDF-like fair scheduler: per-CPU run queues, lag-preserving placement,
/// earliest eligible virtual deadline first, wakeup placement that favors the
/// previous CPU, and periodic load balancing. With `idle_class` set, background
/// tasks run in a class that only gets CPUs no normal task wants.
class EevdfPolicy : public Policy {
 public:
  enum class Class : std::uint8_t { Normal, Idle };

  explicit EevdfPolicy(bool idle_class = false) : idle_class_(idle_class) {}

  /// Restricts the policy to a subset of tasks when embedded in another policy.
  void set_filter(std::function<bool(TaskId)> manages) { manages_ = std::move(manages); }

  void attach(Kernel& k) override;
  void enqueue(TaskId task, EnqueueReason reason) override;
  bool dequeue(TaskId task) override;
  TaskId pick_next(CpuId cpu) override;
  void charge(TaskId task, CpuId cpu, SimDuration ran) override;
  SimDuration slice_for(TaskId task, CpuId cpu) override;
  SimTime next_timer() const override { return next_balance_; }
  void on_timer(SimTime now) override;
  void on_block(TaskId task) override;

  CpuId select_cpu(TaskId task) const;
  /// Weighted average vruntime of the class queue on `cpu`, including its current task.
  std::uint64_t avg_vruntime(CpuId cpu, Class cls) const;
  std::size_t queued(CpuId cpu) const;
  std::uint64_t deadline(TaskId task) const { return deadline_.at(static_cast<std::size_t>(task)); }
  /// Number of queued and running tasks on `cpu`.
  std::uint64_t load(CpuId cpu) const;
  std::uint64_t migrations() const { return migrations_; }

 private:
  struct Rq {
    std::vector<TaskId> tasks;
    std::uint64_t vbase = 0;
  };

  bool manages(TaskId t) const { return t != kNoTask && (!manages_ || manages_(t)); }
  Class class_of(TaskId t) const;
  std::uint64_t weight(TaskId t) const;
  Rq& rq(CpuId cpu, Class cls) { return rqs_[static_cast<std::size_t>(cpu) * 2 + static_cast<std::size_t>(cls)]; }
  const Rq& rq(CpuId cpu, Class cls) const {
    return rqs_[static_cast<std::size_t>(cpu) * 2 + static_cast<std::size_t>(cls)];
  }
  void place(TaskId t, CpuId cpu);
  void insert(TaskId t, CpuId cpu, EnqueueReason reason);
  TaskId pick_from(CpuId cpu, Class cls);
  void balance();

  bool idle_class_;
  std::function<bool(TaskId)> manages_;
  std::vector<Rq> rqs_;
  std::vector<std::int64_t> lag_;
  std::vector<std::uint64_t> deadline_;
  std::vector<CpuId> queued_on_;
  SimTime next_balance_ = kForever;
  std::uint64_t migrations_ = 0;
};

}  // namespace ufsim
