#include "ufsim/rt_policy.hpp"

#include <algorithm>

namespace ufsim {

void RtPolicy::attach(Kernel& k) {
  Policy::attach(k);
  normal_.set_filter([this](TaskId t) { return !is_rt(t); });
  normal_.attach(k);
  const auto n = static_cast<std::size_t>(k.ncpus());
  rt_.assign(n, {});
  normal_ran_.assign(n, 0);
  server_budget_.assign(n, 0);
  queued_on_.assign(static_cast<std::size_t>(k.ntasks()), kNoCpu);
  quantum_left_.assign(static_cast<std::size_t>(k.ntasks()), k.policy_params().rr_quantum);
  window_start_ = 0;
  next_grant_ = k.policy_params().fair_server_share > 0 ? 0 : kForever;
}

int RtPolicy::priority(TaskId t) const {
  const Cgroup& g = kernel().cgroups().at(kernel().task(t).cgroup);
  if (g.rt_priority > 0) return g.rt_priority;
  return g.tier == Tier::TimeSensitive ? kernel().policy_params().rt_priority : 0;
}

int RtPolicy::top_priority(CpuId cpu) const {
  for (const auto& [prio, q] : rt_[static_cast<std::size_t>(cpu)])
    if (!q.empty()) return prio;
  return 0;
}

SimDuration RtPolicy::grant_interval() const {
  const PolicyParams& p = kernel().policy_params();
  return static_cast<SimDuration>(static_cast<double>(p.fair_server_grant) / p.fair_server_share);
}

CpuId RtPolicy::select_cpu(TaskId t) const {
  const Task& task = kernel().task(t);
  const int n = kernel().ncpus();
  const int prio = priority(t);
  CpuId prev = task.last_cpu != kNoCpu ? task.last_cpu : t % n;
  if (!task.affinity.contains(prev)) prev = task.affinity.first();
  const TaskId cur = kernel().current(prev);
  if (!is_rt(cur) || priority(cur) < prio) return prev;

  // Lowest-priority CPU: idle, then running normal work, then lower real-time work.
  CpuId best = kNoCpu;
  int best_rank = prio;
  for (CpuId c = 0; c < n; ++c) {
    if (!task.affinity.contains(c)) continue;
    int rank = 0;
    if (kernel().idle(c)) rank = -2;
    else if (!is_rt(kernel().current(c))) rank = -1;
    else rank = priority(kernel().current(c));
    if (rank < best_rank) {
      best = c;
      best_rank = rank;
    }
  }
  return best != kNoCpu ? best : prev;
}

void RtPolicy::enqueue(TaskId t, EnqueueReason reason) {
  if (!is_rt(t)) {
    normal_.enqueue(t, reason);
    return;
  }
  const Task& task = kernel().task(t);
  const bool requeue = reason == EnqueueReason::Preempted || reason == EnqueueReason::Expired;
  const CpuId cpu = requeue && task.affinity.contains(task.last_cpu) ? task.last_cpu : select_cpu(t);
  if (reason != EnqueueReason::Preempted) quantum_left_[static_cast<std::size_t>(t)] = kernel().policy_params().rr_quantum;
  auto& q = rt_[static_cast<std::size_t>(cpu)][priority(t)];
  if (reason == EnqueueReason::Preempted) q.push_front(t);
  else q.push_back(t);
  queued_on_[static_cast<std::size_t>(t)] = cpu;
  kernel().note_enqueue(t, cpu, kNoCgroup);
  if (requeue) return;
  if (kernel().idle(cpu)) {
    kernel().kick(cpu, KickReason::Idle, t);
    return;
  }
  const TaskId cur = kernel().current(cpu);
  if (cur == kNoTask) return;
  if (is_rt(cur) ? priority(cur) < priority(t) : server_budget_[static_cast<std::size_t>(cpu)] == 0)
    kernel().kick(cpu, KickReason::Preempt, t);
}

bool RtPolicy::dequeue(TaskId t) {
  const CpuId cpu = queued_on_[static_cast<std::size_t>(t)];
  if (cpu == kNoCpu) return normal_.dequeue(t);
  auto& q = rt_[static_cast<std::size_t>(cpu)][priority(t)];
  q.erase(std::find(q.begin(), q.end(), t));
  queued_on_[static_cast<std::size_t>(t)] = kNoCpu;
  return true;
}

TaskId RtPolicy::pick_next(CpuId cpu) {
  const auto c = static_cast<std::size_t>(cpu);
  if (server_budget_[c] > 0) {
    if (normal_.queued(cpu) > 0) return normal_.pick_next(cpu);
    server_budget_[c] = 0;
  }
  const int prio = top_priority(cpu);
  if (prio > 0) {
    auto& q = rt_[c][prio];
    const TaskId t = q.front();
    q.pop_front();
    queued_on_[static_cast<std::size_t>(t)] = kNoCpu;
    return t;
  }
  return normal_.pick_next(cpu);
}

void RtPolicy::charge(TaskId t, CpuId cpu, SimDuration ran) {
  if (is_rt(t)) {
    auto& left = quantum_left_[static_cast<std::size_t>(t)];
    left -= std::min(left, ran);
    return;
  }
  normal_.charge(t, cpu, ran);
  const auto c = static_cast<std::size_t>(cpu);
  normal_ran_[c] += ran;
  server_budget_[c] -= std::min(server_budget_[c], ran);
}

SimDuration RtPolicy::slice_for(TaskId t, CpuId cpu) {
  if (is_rt(t)) {
    if (!rr_) return kForever;
    auto& left = quantum_left_[static_cast<std::size_t>(t)];
    if (left == 0) left = kernel().policy_params().rr_quantum;
    return left;
  }
  const SimDuration slice = normal_.slice_for(t, cpu);
  const SimDuration budget = server_budget_[static_cast<std::size_t>(cpu)];
  return budget > 0 && top_priority(cpu) > 0 ? std::min(slice, budget) : slice;
}

SimTime RtPolicy::next_timer() const { return std::min(next_grant_, normal_.next_timer()); }

void RtPolicy::on_timer(SimTime now) {
  normal_.on_timer(now);
  const PolicyParams& p = kernel().policy_params();
  const SimDuration interval = grant_interval();
  const auto cap = static_cast<SimDuration>(p.fair_server_share * static_cast<double>(p.fair_server_period));
  while (next_grant_ <= now) {
    const SimTime t = next_grant_;
    next_grant_ += interval;
    if (t >= window_start_ + p.fair_server_period || t == 0) {
      window_start_ = t;
      std::fill(normal_ran_.begin(), normal_ran_.end(), 0);
      std::fill(server_budget_.begin(), server_budget_.end(), 0);
    }
    const SimDuration allowance = std::min(cap, ((t - window_start_) / interval + 1) * p.fair_server_grant);
    for (CpuId cpu = 0; cpu < kernel().ncpus(); ++cpu) {
      const auto c = static_cast<std::size_t>(cpu);
      if (normal_.queued(cpu) == 0 || !is_rt(kernel().current(cpu))) continue;
      if (normal_ran_[c] >= allowance) continue;
      server_budget_[c] = std::min(p.fair_server_grant, allowance - normal_ran_[c]);
      kernel().kick(cpu, KickReason::Preempt, kNoTask);
    }
  }
}

void RtPolicy::on_block(TaskId t) {
  if (!is_rt(t)) normal_.on_block(t);
}

}  // namespace ufsim
