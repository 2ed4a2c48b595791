#include "ufsim/engine.hpp"

#include "ufsim/eevdf_policy.hpp"
#include "ufsim/rt_policy.hpp"
#include "ufsim/ufs_policy.hpp"

namespace ufsim {

std::unique_ptr<Policy> make_policy(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Ufs: return std::make_unique<UfsPolicy>();
    case PolicyKind::Eevdf: return std::make_unique<EevdfPolicy>(false);
    case PolicyKind::Idle: return std::make_unique<EevdfPolicy>(true);
    case PolicyKind::Fifo: return std::make_unique<RtPolicy>(false);
    case PolicyKind::Rr: return std::make_unique<RtPolicy>(true);
  }
  throw ConfigError("unknown policy");
}

namespace {

SimTime saturating_add(SimTime a, SimDuration b) { return b >= kForever - a ? kForever : a + b; }

}  // namespace

Engine::Engine(const ScenarioConfig& cfg, std::unique_ptr<Policy> policy)
    : cfg_(cfg), policy_(policy ? std::move(policy) : make_policy(cfg.policy)), hints_(cfg.hinting) {
  validate(cfg_);
  for (const auto& g : cfg_.cgroups) groups_.add(g.name, g.parent, Weight(g.weight), g.rt_priority);
  const int n = cfg_.cpus;
  cpus_.resize(static_cast<std::size_t>(n));
  TaskId id = 0;
  for (const auto& spec : cfg_.tasks) {
    for (int k = 0; k < spec.count; ++k, ++id) {
      Task t;
      t.id = id;
      t.name = spec.name;
      t.cgroup = *groups_.find(spec.cgroup);
      t.state = TaskState::Blocked;
      if (spec.affinity) {
        for (CpuId c : *spec.affinity) t.affinity.insert(c);
      } else {
        t.affinity = CpuSet::all(n);
      }
      t.home_cpu = id % n;
      tasks_.push_back(std::move(t));
      rt_.push_back(TaskRt{make_behavior(spec.workload, spec.start), Rng(cfg_.engine.rng_seed, id)});
      push(EvKind::Start, spec.start, id);
    }
  }
  for (std::size_t i = 0; i < cfg_.events.size(); ++i) {
    reassign_targets_.push_back(*groups_.find(cfg_.events[i].cgroup));
    push(EvKind::Reassign, cfg_.events[i].at, static_cast<std::int64_t>(i));
  }
  policy_->attach(*this);
}

Engine::~Engine() = default;

void Engine::push(EvKind kind, SimTime at, std::int64_t id, std::int64_t arg, std::uint64_t gen) {
  int prio = 0;
  switch (kind) {
    case EvKind::Wakeup:
    case EvKind::Start: prio = 0; break;
    case EvKind::Reassign: prio = 1; break;
    case EvKind::Kick: prio = 2; break;
    case EvKind::SwitchDone: prio = 3; break;
    case EvKind::CpuTimer: prio = 4; break;
    case EvKind::PolicyTimer: prio = 5; break;
  }
  queue_.push(Ev{at, prio, id, seq_++, kind, arg, gen});
}

void Engine::emit(EventKind kind, CpuId cpu, std::int64_t a1, std::int64_t a2, std::int64_t a3) {
  trace_.push(SimEvent{now_, kind, cpu, a1, a2, a3});
}

void Engine::set_state(TaskId t, TaskState s) {
  Task& task = tasks_[static_cast<std::size_t>(t)];
  if (!valid_transition(task.state, s))
    throw SimulationError("task " + std::to_string(t) + ": illegal transition " +
                          std::string(to_string(task.state)) + " -> " + std::string(to_string(s)));
  task.state = s;
}

TaskId Engine::current(CpuId cpu) const {
  const Cpu& c = cpus_.at(static_cast<std::size_t>(cpu));
  return c.state == CpuState::Idle ? kNoTask : c.cur;
}

bool Engine::idle(CpuId cpu) const {
  const Cpu& c = cpus_.at(static_cast<std::size_t>(cpu));
  return c.state == CpuState::Idle && !c.in_resched && !c.kicked;
}

void Engine::kick(CpuId cpu, KickReason reason, TaskId trigger) {
  emit(EventKind::Kick, cpu, static_cast<std::int64_t>(reason), trigger);
  Cpu& c = cpus_.at(static_cast<std::size_t>(cpu));
  if (c.state == CpuState::Idle) c.kicked = true;
  push(EvKind::Kick, now_, cpu, static_cast<std::int64_t>(reason));
}

void Engine::note_enqueue(TaskId t, CpuId cpu, CgroupId cgroup) {
  emit(EventKind::Enqueue, cpu, t, cgroup);
}

void Engine::diag(DiagCode code, std::int64_t value) {
  emit(EventKind::Diag, kNoCpu, static_cast<std::int64_t>(code), value);
}

void Engine::sync_policy_timer() {
  const SimTime t = policy_->next_timer();
  if (t == policy_timer_at_ || t == kForever) return;
  policy_timer_at_ = t;
  push(EvKind::PolicyTimer, std::max(t, now_), 0, 0, t);
}

RunResult Engine::run() {
  const SimTime end = cfg_.engine.duration;
  sync_policy_timer();
  while (!queue_.empty() && !stopped_) {
    const Ev ev = queue_.top();
    if (ev.time > end) break;
    queue_.pop();
    now_ = ev.time;
    switch (ev.kind) {
      case EvKind::Start:
        on_wakeup(static_cast<TaskId>(ev.id), EnqueueReason::New);
        break;
      case EvKind::Wakeup:
        on_wakeup(static_cast<TaskId>(ev.id), EnqueueReason::Wakeup);
        break;
      case EvKind::Reassign:
        on_reassign(static_cast<std::size_t>(ev.id));
        break;
      case EvKind::Kick:
        on_kick(static_cast<CpuId>(ev.id), static_cast<KickReason>(ev.arg));
        break;
      case EvKind::SwitchDone:
        if (ev.gen == cpus_[static_cast<std::size_t>(ev.id)].gen) finish_switch(static_cast<CpuId>(ev.id));
        break;
      case EvKind::CpuTimer:
        if (ev.gen == cpus_[static_cast<std::size_t>(ev.id)].gen) on_cpu_timer(static_cast<CpuId>(ev.id));
        break;
      case EvKind::PolicyTimer:
        if (ev.gen != policy_timer_at_) break;
        policy_timer_at_ = kForever;
        policy_->on_timer(now_);
        break;
    }
    sync_policy_timer();
  }
  RunResult r;
  r.panicked = stopped_;
  r.end_time = stopped_ ? now_ : end;
  r.tasks = tasks_;
  r.trace = std::move(trace_);
  return r;
}

void Engine::on_wakeup(TaskId t, EnqueueReason why) {
  set_state(t, TaskState::Runnable);
  emit(EventKind::Wakeup, kNoCpu, t);
  policy_->enqueue(t, why);
}

void Engine::on_kick(CpuId c, KickReason reason) {
  Cpu& cpu = cpus_[static_cast<std::size_t>(c)];
  cpu.kicked = false;
  switch (cpu.state) {
    case CpuState::Idle:
      reschedule(c, EnqueueReason::Preempted);
      break;
    case CpuState::Switching:
      if (reason == KickReason::Preempt) cpu.resched_pending = true;
      break;
    case CpuState::Running:
      if (reason == KickReason::Preempt) reschedule(c, EnqueueReason::Preempted);
      break;
  }
}

void Engine::account(CpuId c) {
  Cpu& cpu = cpus_[static_cast<std::size_t>(c)];
  const SimDuration ran = now_ - cpu.run_start;
  TaskRt& rt = rt_[static_cast<std::size_t>(cpu.cur)];
  rt.remaining -= std::min(rt.remaining, ran);
  policy_->charge(cpu.cur, c, ran);
  cpu.run_start = now_;
}

void Engine::reschedule(CpuId c, EnqueueReason why) {
  Cpu& cpu = cpus_[static_cast<std::size_t>(c)];
  TaskId prev = kNoTask;
  cpu.in_resched = true;
  if (cpu.state == CpuState::Running) {
    prev = cpu.cur;
    account(c);
    cpu.state = CpuState::Idle;
    cpu.cur = kNoTask;
    set_state(prev, TaskState::Runnable);
    policy_->enqueue(prev, why);
  }
  switch_to_next(c, prev);
}

void Engine::switch_to_next(CpuId c, TaskId prev) {
  Cpu& cpu = cpus_[static_cast<std::size_t>(c)];
  cpu.in_resched = true;
  const TaskId next = policy_->pick_next(c);
  cpu.in_resched = false;
  ++cpu.gen;
  cpu.resched_pending = false;
  if (next == kNoTask) {
    cpu.state = CpuState::Idle;
    cpu.cur = kNoTask;
    if (prev != kNoTask) emit(EventKind::Switch, c, prev, kNoTask, 0);
    return;
  }
  set_state(next, TaskState::Running);
  cpu.cur = next;
  if (next == prev) {
    // Same task picked again: the switch is elided.
    cpu.state = CpuState::Running;
    cpu.run_start = now_;
    cpu.slice_end = saturating_add(now_, policy_->slice_for(next, c));
    run_task(c);
    return;
  }
  const Task& t = tasks_[static_cast<std::size_t>(next)];
  SimDuration cost = cfg_.engine.ctx_switch_cost;
  if (t.last_cpu != kNoCpu && t.last_cpu != c) cost += cfg_.engine.migration_cost;
  cpu.state = CpuState::Switching;
  cpu.switch_prev = prev;
  cpu.switch_cost = cost;
  push(EvKind::SwitchDone, now_ + cost, c, 0, cpu.gen);
}

void Engine::finish_switch(CpuId c) {
  Cpu& cpu = cpus_[static_cast<std::size_t>(c)];
  emit(EventKind::Switch, c, cpu.switch_prev, cpu.cur, static_cast<std::int64_t>(cpu.switch_cost));
  Task& t = tasks_[static_cast<std::size_t>(cpu.cur)];
  t.last_cpu = c;
  cpu.state = CpuState::Running;
  cpu.run_start = now_;
  cpu.slice_end = saturating_add(now_, policy_->slice_for(cpu.cur, c));
  if (cpu.resched_pending) {
    cpu.resched_pending = false;
    reschedule(c, EnqueueReason::Preempted);
    return;
  }
  run_task(c);
}

void Engine::leave_cpu(CpuId c, TaskState to) {
  Cpu& cpu = cpus_[static_cast<std::size_t>(c)];
  const TaskId t = cpu.cur;
  account(c);
  cpu.state = CpuState::Idle;
  cpu.cur = kNoTask;
  set_state(t, to);
  Task& task = tasks_[static_cast<std::size_t>(t)];
  if (task.boosted) {
    bool holds = false;
    for (const auto& [id, lock] : locks_) holds = holds || lock.holder == t;
    if (!holds) diag(DiagCode::BoostLeak, t);
  }
  policy_->on_block(t);
}

void Engine::run_task(CpuId c) {
  Cpu& cpu = cpus_[static_cast<std::size_t>(c)];
  const TaskId t = cpu.cur;
  TaskRt& rt = rt_[static_cast<std::size_t>(t)];
  while (true) {
    if (rt.remaining > 0) {
      ++cpu.gen;
      push(EvKind::CpuTimer, std::min(saturating_add(now_, rt.remaining), cpu.slice_end), c, 0, cpu.gen);
      return;
    }
    StepContext ctx{now_, rt.last_lock_ok, rt.lock_failures, &rt.rng};
    const Action a = rt.behavior->next(ctx);
    if (auto* compute = std::get_if<action::Compute>(&a)) {
      rt.remaining = compute->amount;
    } else if (auto* sleep = std::get_if<action::Sleep>(&a)) {
      leave_cpu(c, TaskState::Blocked);
      push(EvKind::Wakeup, now_ + sleep->amount, t);
      switch_to_next(c, t);
      return;
    } else if (auto* lock = std::get_if<action::TryLock>(&a)) {
      rt.last_lock_ok = do_try_lock(c, t, lock->lock, lock->final_check);
      if (stopped_) return;
    } else if (auto* unlock = std::get_if<action::Unlock>(&a)) {
      do_unlock(c, t, unlock->lock);
    } else if (auto* done = std::get_if<action::Complete>(&a)) {
      emit(EventKind::RequestDone, c, t, static_cast<std::int64_t>(done->latency));
    } else if (auto* panic = std::get_if<action::Panic>(&a)) {
      account(c);
      set_state(t, TaskState::Panicked);
      emit(EventKind::Panic, c, t, panic->failures);
      stopped_ = true;
      return;
    } else {
      leave_cpu(c, TaskState::Finished);
      switch_to_next(c, t);
      return;
    }
  }
}

void Engine::on_cpu_timer(CpuId c) {
  Cpu& cpu = cpus_[static_cast<std::size_t>(c)];
  account(c);
  if (rt_[static_cast<std::size_t>(cpu.cur)].remaining == 0) {
    run_task(c);
    return;
  }
  reschedule(c, EnqueueReason::Expired);
}

bool Engine::do_try_lock(CpuId c, TaskId t, LockId id, bool final_check) {
  LockState& lock = locks_[id];
  lock.id = id;
  TaskRt& rt = rt_[static_cast<std::size_t>(t)];
  const Tier tier = groups_.at(tasks_[static_cast<std::size_t>(t)].cgroup).tier;
  auto decision = hints_.publish({t, id, HintKind::Attempt}, tier);
  const bool ok = !lock.holder;
  emit(EventKind::LockAttempt, c, t, id, ok ? 1 : 0);
  if (ok) {
    lock.holder = t;
    lock.consecutive_failures[t] = 0;
    rt.lock_failures = 0;
    hints_.publish({t, id, HintKind::Acquired}, tier);
    return true;
  }
  if (final_check) rt.lock_failures = ++lock.consecutive_failures[t];
  if (decision && decision->kind == BoostDecision::Kind::Boost) {
    emit(EventKind::Boost, kNoCpu, decision->task, id);
    policy_->on_boost(decision->task, id, t);
  }
  return false;
}

void Engine::do_unlock(CpuId c, TaskId t, LockId id) {
  LockState& lock = locks_[id];
  if (lock.holder != t)
    throw SimulationError("task " + std::to_string(t) + " unlocked lock " + std::to_string(id) +
                          " it does not hold");
  lock.holder.reset();
  emit(EventKind::LockRelease, c, t, id);
  const Tier tier = groups_.at(tasks_[static_cast<std::size_t>(t)].cgroup).tier;
  auto decision = hints_.publish({t, id, HintKind::Released}, tier);
  if (decision && decision->kind == BoostDecision::Kind::Unboost) {
    emit(EventKind::Unboost, kNoCpu, t);
    policy_->on_unboost(t);
  }
}

void Engine::on_reassign(std::size_t idx) {
  const TaskId t = cfg_.events[idx].task;
  const CgroupId to = reassign_targets_[idx];
  Task& task = tasks_[static_cast<std::size_t>(t)];
  emit(EventKind::Reassign, kNoCpu, t, to);
  // The task restarts at the smallest vruntime found in its new cgroup.
  auto adopt = [&]() {
    std::optional<std::uint64_t> vr;
    for (const Task& other : tasks_)
      if (other.id != t && other.cgroup == to && (!vr || other.vruntime < *vr)) vr = other.vruntime;
    task.cgroup = to;
    task.vruntime = vr.value_or(groups_.at(to).group_vruntime);
  };
  if (task.state == TaskState::Runnable && policy_->dequeue(t)) {
    adopt();
    policy_->enqueue(t, EnqueueReason::Migrated);
    return;
  }
  if (task.state == TaskState::Running) {
    for (std::size_t c = 0; c < cpus_.size(); ++c)
      if (cpus_[c].state == CpuState::Running && cpus_[c].cur == t) account(static_cast<CpuId>(c));
  }
  adopt();
}

RunResult simulate(const ScenarioConfig& cfg) { return Engine(cfg).run(); }

}  // namespace ufsim
