#include "ufsim/eevdf_policy.hpp"

#include <algorithm>

namespace ufsim {

void EevdfPolicy::attach(Kernel& k) {
  Policy::attach(k);
  rqs_.assign(static_cast<std::size_t>(k.ncpus()) * 2, {});
  lag_.assign(static_cast<std::size_t>(k.ntasks()), 0);
  deadline_.assign(static_cast<std::size_t>(k.ntasks()), 0);
  queued_on_.assign(static_cast<std::size_t>(k.ntasks()), kNoCpu);
  next_balance_ = k.policy_params().balance_interval;
}

EevdfPolicy::Class EevdfPolicy::class_of(TaskId t) const {
  if (!idle_class_) return Class::Normal;
  const Task& task = kernel().task(t);
  return kernel().cgroups().at(task.cgroup).tier == Tier::Background ? Class::Idle : Class::Normal;
}

std::uint64_t EevdfPolicy::weight(TaskId t) const {
  const Rational w = kernel().cgroups().scaled_weight(kernel().task(t).cgroup);
  return std::max<std::uint64_t>(1, w.num / w.den);
}

std::uint64_t EevdfPolicy::avg_vruntime(CpuId cpu, Class cls) const {
  const Rq& q = rq(cpu, cls);
  unsigned __int128 sum = 0;
  std::uint64_t total = 0;
  auto add = [&](TaskId t) {
    const std::uint64_t w = weight(t);
    sum += static_cast<unsigned __int128>(kernel().task(t).vruntime) * w;
    total += w;
  };
  for (TaskId t : q.tasks) add(t);
  const TaskId cur = kernel().current(cpu);
  if (manages(cur) && class_of(cur) == cls && queued_on_[static_cast<std::size_t>(cur)] == kNoCpu) add(cur);
  if (total == 0) return q.vbase;
  return static_cast<std::uint64_t>(sum / total);
}

std::size_t EevdfPolicy::queued(CpuId cpu) const {
  return rq(cpu, Class::Normal).tasks.size() + rq(cpu, Class::Idle).tasks.size();
}

std::uint64_t EevdfPolicy::load(CpuId cpu) const {
  std::uint64_t l = 0;
  for (auto cls : {Class::Normal, Class::Idle}) l += rq(cpu, cls).tasks.size();
  if (manages(kernel().current(cpu))) ++l;
  return l;
}

CpuId EevdfPolicy::select_cpu(TaskId t) const {
  const Task& task = kernel().task(t);
  const int n = kernel().ncpus();
  CpuId prev = task.last_cpu != kNoCpu ? task.last_cpu : t % n;
  if (!task.affinity.contains(prev)) prev = task.affinity.first();
  if (kernel().idle(prev)) return prev;
  for (int i = 1; i < n; ++i) {
    const CpuId c = (prev + i) % n;
    if (task.affinity.contains(c) && kernel().idle(c)) return c;
  }
  return prev;
}

void EevdfPolicy::place(TaskId t, CpuId cpu) {
  Task& task = kernel().task(t);
  const std::int64_t v = static_cast<std::int64_t>(avg_vruntime(cpu, class_of(t)));
  const std::int64_t lag = lag_[static_cast<std::size_t>(t)];
  task.vruntime = static_cast<std::uint64_t>(std::max<std::int64_t>(0, v - lag));
}

void EevdfPolicy::insert(TaskId t, CpuId cpu, EnqueueReason reason) {
  if (reason != EnqueueReason::Preempted && reason != EnqueueReason::Expired) place(t, cpu);
  if (reason != EnqueueReason::Preempted)
    deadline_[static_cast<std::size_t>(t)] =
        kernel().task(t).vruntime +
        scale_runtime(kernel().engine_params().slice,
                      kernel().cgroups().scaled_weight(kernel().task(t).cgroup));
  rq(cpu, class_of(t)).tasks.push_back(t);
  queued_on_[static_cast<std::size_t>(t)] = cpu;
  kernel().note_enqueue(t, cpu, kNoCgroup);
}

void EevdfPolicy::enqueue(TaskId t, EnqueueReason reason) {
  const Task& task = kernel().task(t);
  const bool requeue = reason == EnqueueReason::Preempted || reason == EnqueueReason::Expired;
  const CpuId cpu = requeue && task.affinity.contains(task.last_cpu) ? task.last_cpu : select_cpu(t);
  insert(t, cpu, reason);
  if (requeue) return;
  if (kernel().idle(cpu)) {
    kernel().kick(cpu, KickReason::Idle, t);
    return;
  }
  const TaskId cur = kernel().current(cpu);
  if (class_of(t) == Class::Normal && manages(cur) && class_of(cur) == Class::Idle)
    kernel().kick(cpu, KickReason::Preempt, t);
}

bool EevdfPolicy::dequeue(TaskId t) {
  const CpuId cpu = queued_on_[static_cast<std::size_t>(t)];
  if (cpu == kNoCpu) return false;
  auto& v = rq(cpu, class_of(t)).tasks;
  v.erase(std::find(v.begin(), v.end(), t));
  queued_on_[static_cast<std::size_t>(t)] = kNoCpu;
  return true;
}

TaskId EevdfPolicy::pick_from(CpuId cpu, Class cls) {
  Rq& q = rq(cpu, cls);
  if (q.tasks.empty()) return kNoTask;
  const std::uint64_t v = avg_vruntime(cpu, cls);
  TaskId best = kNoTask;
  auto better = [&](TaskId a, TaskId b) {
    const auto da = deadline_[static_cast<std::size_t>(a)];
    const auto db = deadline_[static_cast<std::size_t>(b)];
    return da != db ? da < db : a < b;
  };
  for (TaskId t : q.tasks)
    if (kernel().task(t).vruntime <= v && (best == kNoTask || better(t, best))) best = t;
  if (best == kNoTask) {
    // Rounding in the average can leave nothing eligible; fall back to the minimum.
    for (TaskId t : q.tasks)
      if (best == kNoTask || kernel().task(t).vruntime < kernel().task(best).vruntime) best = t;
  }
  q.vbase = v;
  dequeue(best);
  return best;
}

TaskId EevdfPolicy::pick_next(CpuId cpu) {
  const TaskId t = pick_from(cpu, Class::Normal);
  return t != kNoTask ? t : pick_from(cpu, Class::Idle);
}

void EevdfPolicy::charge(TaskId t, CpuId, SimDuration ran) {
  Task& task = kernel().task(t);
  task.vruntime += scale_runtime(ran, kernel().cgroups().scaled_weight(task.cgroup));
}

SimDuration EevdfPolicy::slice_for(TaskId, CpuId) { return kernel().engine_params().slice; }

void EevdfPolicy::on_block(TaskId t) {
  const Task& task = kernel().task(t);
  if (task.last_cpu == kNoCpu) return;
  Rq& q = rq(task.last_cpu, class_of(t));
  const std::uint64_t v = q.tasks.empty() ? task.vruntime : avg_vruntime(task.last_cpu, class_of(t));
  if (q.tasks.empty()) q.vbase = task.vruntime;
  const auto limit = static_cast<std::int64_t>(
      2 * scale_runtime(kernel().engine_params().slice, kernel().cgroups().scaled_weight(task.cgroup)));
  const std::int64_t lag = static_cast<std::int64_t>(v) - static_cast<std::int64_t>(task.vruntime);
  lag_[static_cast<std::size_t>(t)] = std::clamp(lag, -limit, limit);
}

void EevdfPolicy::on_timer(SimTime now) {
  while (next_balance_ <= now) {
    balance();
    next_balance_ += kernel().policy_params().balance_interval;
  }
}

void EevdfPolicy::balance() {
  const int n = kernel().ncpus();
  for (int iter = 0; iter < kernel().ntasks(); ++iter) {
    CpuId busiest = 0;
    CpuId idlest = 0;
    std::vector<std::uint64_t> loads(static_cast<std::size_t>(n));
    for (CpuId c = 0; c < n; ++c) {
      loads[static_cast<std::size_t>(c)] = load(c);
      if (loads[static_cast<std::size_t>(c)] > loads[static_cast<std::size_t>(busiest)]) busiest = c;
      if (loads[static_cast<std::size_t>(c)] < loads[static_cast<std::size_t>(idlest)]) idlest = c;
    }
    if (loads[static_cast<std::size_t>(busiest)] - loads[static_cast<std::size_t>(idlest)] <= 1) return;
    TaskId move = kNoTask;
    for (auto cls : {Class::Normal, Class::Idle}) {
      for (TaskId t : rq(busiest, cls).tasks) {
        if (!kernel().task(t).affinity.contains(idlest)) continue;
        if (move == kNoTask || t < move) move = t;
      }
      if (move != kNoTask) break;
    }
    if (move == kNoTask) return;
    const std::uint64_t v = avg_vruntime(busiest, class_of(move));
    lag_[static_cast<std::size_t>(move)] =
        static_cast<std::int64_t>(v) - static_cast<std::int64_t>(kernel().task(move).vruntime);
    dequeue(move);
    insert(move, idlest, EnqueueReason::Migrated);
    ++migrations_;
    if (kernel().idle(idlest)) kernel().kick(idlest, KickReason::Idle, move);
  }
}

}  // namespace ufsim
