#include "ufsim/ufs_policy.hpp"

namespace ufsim {

void UfsPolicy::attach(Kernel& k) {
  Policy::attach(k);
  local_.assign(static_cast<std::size_t>(k.ncpus()), {});
  current_cgroup_.assign(static_cast<std::size_t>(k.ncpus()), kNoCgroup);
  where_.assign(static_cast<std::size_t>(k.ntasks()), Where::None);
  local_cpu_.assign(static_cast<std::size_t>(k.ntasks()), kNoCpu);
  queued_key_.assign(static_cast<std::size_t>(k.ntasks()), 0);
  last_group_vr_.assign(k.cgroups().size(), 0);
}

bool UfsPolicy::time_sensitive(TaskId t) const {
  const Task& task = kernel().task(t);
  return task.boosted || kernel().cgroups().at(task.cgroup).tier == Tier::TimeSensitive;
}

bool UfsPolicy::is_background_work(TaskId t) const { return t != kNoTask && !time_sensitive(t); }

std::uint64_t UfsPolicy::key_of(TaskId t) const {
  auto it = boost_vr_.find(t);
  return it != boost_vr_.end() ? it->second : kernel().task(t).vruntime;
}

CpuId UfsPolicy::select_cpu(TaskId t) const {
  const Task& task = kernel().task(t);
  const int n = kernel().ncpus();
  if (task.affinity.contains(task.last_cpu) && kernel().idle(task.last_cpu)) return task.last_cpu;
  for (CpuId c = 0; c < n; ++c)
    if (task.affinity.contains(c) && kernel().idle(c)) return c;

  CpuId best = kNoCpu;
  std::uint64_t best_vr = 0;
  for (CpuId c = 0; c < n; ++c) {
    if (!task.affinity.contains(c)) continue;
    const TaskId cur = kernel().current(c);
    if (!is_background_work(cur)) continue;
    const std::uint64_t vr = kernel().task(cur).vruntime;
    if (best == kNoCpu || vr > best_vr) {
      best = c;
      best_vr = vr;
    }
  }
  if (best != kNoCpu) return best;

  std::size_t fewest = 0;
  for (CpuId c = 0; c < n; ++c) {
    if (!task.affinity.contains(c)) continue;
    const std::size_t depth = local_[static_cast<std::size_t>(c)].size();
    if (best == kNoCpu || depth < fewest) {
      best = c;
      fewest = depth;
    }
  }
  return best;
}

void UfsPolicy::enqueue(TaskId t, EnqueueReason reason) {
  Task& task = kernel().task(t);
  CgroupTree& groups = kernel().cgroups();
  const SimDuration slice = kernel().engine_params().slice;

  if (!time_sensitive(t)) {
    const Cgroup& g = groups.at(task.cgroup);
    task.vruntime = clamp_vruntime(task.vruntime, g.group_vruntime, slice);
    if (task.vruntime + slice < g.group_vruntime) ++checks_.clamp_violations;
    insert_group(t);
    return;
  }

  if (auto it = boost_vr_.find(t); it != boost_vr_.end()) {
    const Cgroup& g = groups.at(boost_group_.at(t));
    it->second = clamp_vruntime(it->second, g.group_vruntime, slice);
  } else {
    const Cgroup& g = groups.at(task.cgroup);
    task.vruntime = clamp_vruntime(task.vruntime, g.group_vruntime, slice);
    if (task.vruntime + slice < g.group_vruntime) ++checks_.clamp_violations;
  }

  CpuId cpu = kNoCpu;
  if ((reason == EnqueueReason::Preempted || reason == EnqueueReason::Expired) &&
      task.affinity.contains(task.last_cpu))
    cpu = task.last_cpu;  // the CPU is rescheduling right now
  else
    cpu = select_cpu(t);
  insert_local(t, cpu, reason);
}

void UfsPolicy::insert_local(TaskId t, CpuId cpu, EnqueueReason reason) {
  auto& q = local_[static_cast<std::size_t>(cpu)];
  const bool had_queued = !q.empty();
  const std::uint64_t key = key_of(t);
  q.emplace(key, t);
  where_[static_cast<std::size_t>(t)] = Where::Local;
  local_cpu_[static_cast<std::size_t>(t)] = cpu;
  queued_key_[static_cast<std::size_t>(t)] = key;
  kernel().note_enqueue(t, cpu, kNoCgroup);

  if (reason == EnqueueReason::Preempted || reason == EnqueueReason::Expired) return;
  if (kernel().idle(cpu)) {
    kernel().kick(cpu, KickReason::Idle, t);
    return;
  }
  const TaskId cur = kernel().current(cpu);
  if (cur == kNoTask) return;
  if (is_background_work(cur)) {
    kernel().kick(cpu, KickReason::Preempt, t);
    return;
  }
  // A waking task that is well behind the running one preempts it, as long as
  // nothing else is already waiting there.
  if (reason != EnqueueReason::Wakeup && reason != EnqueueReason::New) return;
  if (had_queued) return;
  const Task& task = kernel().task(t);
  const SimDuration gran = scale_runtime(kernel().engine_params().slice,
                                         scaled(boost_group_.count(t) ? boost_group_.at(t) : task.cgroup));
  if (key + gran < key_of(cur)) kernel().kick(cpu, KickReason::Preempt, t);
}

void UfsPolicy::insert_group(TaskId t) {
  Task& task = kernel().task(t);
  const Cgroup& g = kernel().cgroups().at(task.cgroup);
  group_queues_[task.cgroup].emplace(task.vruntime, t);
  where_[static_cast<std::size_t>(t)] = Where::Group;
  queued_key_[static_cast<std::size_t>(t)] = task.vruntime;
  tree_.activate(task.cgroup, g.group_vruntime);
  if (tree_.parked(task.cgroup)) ++checks_.stash_violations;
  kernel().note_enqueue(t, kNoCpu, task.cgroup);

  // Keep idle CPUs busy: wake one that can run this task.
  if (task.affinity.contains(task.last_cpu) && kernel().idle(task.last_cpu)) {
    kernel().kick(task.last_cpu, KickReason::Idle, t);
    return;
  }
  for (CpuId c = 0; c < kernel().ncpus(); ++c) {
    if (task.affinity.contains(c) && kernel().idle(c)) {
      kernel().kick(c, KickReason::Idle, t);
      return;
    }
  }
}

bool UfsPolicy::dequeue(TaskId t) {
  const auto i = static_cast<std::size_t>(t);
  switch (where_[i]) {
    case Where::None:
      return false;
    case Where::Local:
      local_[static_cast<std::size_t>(local_cpu_[i])].erase({queued_key_[i], t});
      break;
    case Where::Group:
      group_queues_[kernel().task(t).cgroup].erase({queued_key_[i], t});
      break;
  }
  where_[i] = Where::None;
  local_cpu_[i] = kNoCpu;
  return true;
}

TaskId UfsPolicy::pick_next(CpuId cpu) {
  auto& q = local_[static_cast<std::size_t>(cpu)];
  TaskId t = kNoTask;
  if (!q.empty()) {
    t = q.begin()->second;
    dequeue(t);
  } else if ((t = steal_time_sensitive(cpu)) == kNoTask) {
    t = dispatch_background(cpu);
  }
  current_cgroup_[static_cast<std::size_t>(cpu)] = t == kNoTask ? kNoCgroup : kernel().task(t).cgroup;
  return t;
}

TaskId UfsPolicy::steal_time_sensitive(CpuId cpu) {
  TaskId pick = kNoTask;
  std::size_t depth = 0;
  for (CpuId c = 0; c < kernel().ncpus(); ++c) {
    const auto& q = local_[static_cast<std::size_t>(c)];
    if (c == cpu || q.size() <= depth) continue;
    for (const auto& [key, t] : q) {
      if (kernel().task(t).affinity.contains(cpu)) {
        pick = t;
        depth = q.size();
        break;
      }
    }
  }
  if (pick == kNoTask) return kNoTask;
  dequeue(pick);
  return pick;
}

TaskId UfsPolicy::dispatch_background(CpuId cpu) {
  CgroupTree& groups = kernel().cgroups();
  const SimDuration slice = kernel().engine_params().slice;
  const int retries = kernel().policy_params().dispatch_retries;
  for (int i = 0; i < retries; ++i) {
    auto node = tree_.peek();
    if (!node) return kNoTask;
    auto& q = group_queues_[node->cgroup];
    if (q.empty()) {
      tree_.park(node->cgroup);
      if (tree_.in_tree(node->cgroup)) ++checks_.stash_violations;
      continue;
    }
    TaskId pick = kNoTask;
    for (const auto& [vr, t] : q) {
      if (kernel().task(t).affinity.contains(cpu)) {
        pick = t;
        break;
      }
    }
    if (pick == kNoTask) {
      // Nothing here may run on this CPU. Look further along the tree.
      for (const auto& [key, cg] : tree_.ordered()) {
        (void)key;
        auto& other = group_queues_[cg];
        for (const auto& [vr, t] : other) {
          if (kernel().task(t).affinity.contains(cpu)) {
            pick = t;
            break;
          }
        }
        if (pick != kNoTask) break;
      }
      if (pick == kNoTask) return kNoTask;
    } else if (node->key > *tree_.min_key_by_scan()) {
      ++checks_.argmin_violations;
    }
    const CgroupId cg = kernel().task(pick).cgroup;
    dequeue(pick);
    Cgroup& g = groups.at(cg);
    // The move to a local queue counts as an enqueue.
    Task& task = kernel().task(pick);
    task.vruntime = clamp_vruntime(task.vruntime, g.group_vruntime, slice);
    if (g.group_vruntime < last_group_vr_[static_cast<std::size_t>(cg)]) ++checks_.monotonicity_violations;
    g.group_vruntime += scale_runtime(slice, groups.scaled_weight(cg));
    last_group_vr_[static_cast<std::size_t>(cg)] = g.group_vruntime;
    tree_.rekey(cg, g.group_vruntime);
    ++checks_.dispatches;
    return pick;
  }
  if (!tree_.empty()) {
    ++checks_.retry_exhausted;
    kernel().diag(DiagCode::DispatchRetryExhausted, cpu);
  }
  return kNoTask;
}

void UfsPolicy::charge(TaskId t, CpuId /*cpu*/, SimDuration ran) {
  Task& task = kernel().task(t);
  CgroupTree& groups = kernel().cgroups();
  if (auto it = boost_vr_.find(t); it != boost_vr_.end()) {
    it->second += scale_runtime(ran, scaled(boost_group_.at(t)));
    if (!task.boosted) {
      boost_vr_.erase(it);
      boost_group_.erase(t);
    }
    return;
  }
  const std::uint64_t before = task.vruntime;
  const std::uint64_t delta = scale_runtime(ran, scaled(task.cgroup));
  task.vruntime += delta;
  if (task.vruntime < before) ++checks_.monotonicity_violations;
  Cgroup& g = groups.at(task.cgroup);
  if (g.tier == Tier::TimeSensitive) {
    g.group_vruntime += delta;
    last_group_vr_[static_cast<std::size_t>(task.cgroup)] = g.group_vruntime;
  }
}

SimDuration UfsPolicy::slice_for(TaskId, CpuId) { return kernel().engine_params().slice; }

void UfsPolicy::on_boost(TaskId holder, LockId lock, TaskId booster) {
  Task& task = kernel().task(holder);
  if (kernel().cgroups().at(task.cgroup).tier == Tier::TimeSensitive || task.boosted) return;
  const Task& b = kernel().task(booster);
  task.boosted = true;
  task.boost_lock = lock;
  boost_vr_[holder] = b.vruntime;
  boost_group_[holder] = b.cgroup;
  if (where_[static_cast<std::size_t>(holder)] == Where::Group) {
    dequeue(holder);
    enqueue(holder, EnqueueReason::Wakeup);
  }
}

void UfsPolicy::on_unboost(TaskId holder) {
  Task& task = kernel().task(holder);
  if (!task.boosted) return;
  task.boosted = false;
  task.boost_lock.reset();
  if (where_[static_cast<std::size_t>(holder)] == Where::Local) {
    dequeue(holder);
    boost_vr_.erase(holder);
    boost_group_.erase(holder);
    enqueue(holder, EnqueueReason::Wakeup);
  } else if (kernel().current(task.last_cpu) != holder) {
    boost_vr_.erase(holder);
    boost_group_.erase(holder);
  }
}

}  // namespace ufsim
