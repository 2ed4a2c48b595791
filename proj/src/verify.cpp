#include "ufsim/verify.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>

#include "ufsim/model.hpp"

namespace ufsim {
namespace {

struct TaskMeta {
  CpuSet affinity;
  CgroupId cgroup;
};

std::vector<TaskMeta> task_meta(const ScenarioConfig& cfg) {
  std::map<std::string, CgroupId> ids;
  for (std::size_t i = 0; i < cfg.cgroups.size(); ++i) ids[cfg.cgroups[i].name] = static_cast<CgroupId>(i);
  std::vector<TaskMeta> out;
  for (const auto& spec : cfg.tasks) {
    CpuSet aff = CpuSet::all(cfg.cpus);
    if (spec.affinity) {
      aff = CpuSet();
      for (CpuId c : *spec.affinity) aff.insert(c);
    }
    for (int k = 0; k < spec.count; ++k) out.push_back({aff, ids.at(spec.cgroup)});
  }
  return out;
}

SimTime run_end(const Trace& trace, const ScenarioConfig& cfg) {
  for (const auto& e : trace.events())
    if (e.kind == EventKind::Panic) return e.time;
  return cfg.engine.duration;
}

SimTime decision_time(const SimEvent& e) {
  return e.time - static_cast<SimTime>(std::max<std::int64_t>(0, e.arg3));
}

// Indices of enqueue events whose task was picked again on the same CPU with
// the switch elided. The running task is enqueued when its slice ends; if the
// CPU's next logged switch was decided later than that, the task kept running.
std::vector<bool> repicked_enqueues(const Trace& trace, int ncpus, std::size_t ntasks) {
  const auto& ev = trace.events();
  std::vector<bool> out(ev.size(), false);
  std::vector<CpuId> running_on(ntasks, kNoCpu);
  std::vector<std::optional<std::size_t>> pending(static_cast<std::size_t>(ncpus));
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const SimEvent& e = ev[i];
    if (e.kind == EventKind::Enqueue) {
      const CpuId c = running_on.at(static_cast<std::size_t>(e.arg1));
      if (c == kNoCpu) continue;
      auto& p = pending[static_cast<std::size_t>(c)];
      if (p) out[*p] = true;
      p = i;
    } else if (e.kind == EventKind::Switch) {
      auto& p = pending[static_cast<std::size_t>(e.cpu)];
      if (p && ev[*p].time != decision_time(e)) out[*p] = true;
      p.reset();
      if (e.arg1 >= 0) running_on[static_cast<std::size_t>(e.arg1)] = kNoCpu;
      if (e.arg2 >= 0) running_on[static_cast<std::size_t>(e.arg2)] = e.cpu;
    }
  }
  return out;
}

std::string describe(const char* what, TaskId t, CpuId c, SimDuration gap) {
  return std::string(what) + ": task " + std::to_string(t) + ", CPU " + std::to_string(c) + ", " +
         std::to_string(gap) + " ns";
}

}  // namespace

std::vector<Violation> check_work_conservation(const Trace& trace, const ScenarioConfig& cfg) {
  const auto meta = task_meta(cfg);
  const SimDuration threshold = cfg.engine.ctx_switch_cost;
  const auto n = static_cast<std::size_t>(cfg.cpus);
  std::vector<TaskId> occupant(n, kNoTask);
  std::vector<SimTime> since(n, 0);
  std::vector<std::optional<SimTime>> waiting(meta.size());
  struct Wait {
    TaskId task;
    SimTime from, to;
  };
  std::deque<Wait> finished;
  std::vector<Violation> out;

  // An idle period of `c` over [i0, i1) against every wait that overlapped it.
  auto close_idle = [&](CpuId c, SimTime i0, SimTime i1) {
    auto test = [&](TaskId t, SimTime w0, SimTime w1) {
      if (!meta[static_cast<std::size_t>(t)].affinity.contains(c)) return;
      const SimTime lo = std::max(i0, w0);
      const SimTime hi = std::min(i1, w1);
      if (hi > lo && hi - lo > threshold) out.push_back({hi, describe("idle CPU beside waiting task", t, c, hi - lo)});
    };
    for (std::size_t t = 0; t < waiting.size(); ++t)
      if (waiting[t]) test(static_cast<TaskId>(t), *waiting[t], i1);
    for (const auto& w : finished) test(w.task, w.from, w.to);
  };
  auto prune = [&]() {
    std::optional<SimTime> oldest;
    for (std::size_t c = 0; c < n; ++c)
      if (occupant[c] == kNoTask && (!oldest || since[c] < *oldest)) oldest = since[c];
    while (!finished.empty() && (!oldest || finished.front().to <= *oldest)) finished.pop_front();
  };

  const SimTime end = run_end(trace, cfg);
  const auto repicked = repicked_enqueues(trace, cfg.cpus, meta.size());
  for (std::size_t i = 0; i < trace.events().size(); ++i) {
    const SimEvent& e = trace.events()[i];
    if (e.kind == EventKind::Enqueue) {
      if (repicked[i]) continue;
      auto& w = waiting.at(static_cast<std::size_t>(e.arg1));
      if (!w) w = e.time;
      continue;
    }
    if (e.kind != EventKind::Switch) continue;
    const auto c = static_cast<std::size_t>(e.cpu);
    const SimTime decision = decision_time(e);
    if (e.arg2 >= 0) {
      auto& w = waiting.at(static_cast<std::size_t>(e.arg2));
      if (w) {
        finished.push_back({static_cast<TaskId>(e.arg2), *w, decision});
        w.reset();
      }
    }
    if (occupant[c] == kNoTask) close_idle(e.cpu, since[c], decision);
    occupant[c] = static_cast<TaskId>(e.arg2);
    since[c] = e.time;
    prune();
  }
  for (std::size_t c = 0; c < n; ++c)
    if (occupant[c] == kNoTask) close_idle(static_cast<CpuId>(c), std::min(since[c], end), end);
  return out;
}

std::vector<Violation> check_tier_precedence(const Trace& trace, const ScenarioConfig& cfg) {
  auto meta = task_meta(cfg);
  std::vector<Tier> tier_of;
  for (const auto& g : cfg.cgroups) tier_of.push_back(CgroupTree::tier_from_name(g.name));
  const SimDuration threshold = cfg.engine.ctx_switch_cost;
  std::vector<bool> boosted(meta.size(), false);
  auto ts = [&](std::size_t t) {
    return boosted[t] || tier_of[static_cast<std::size_t>(meta[t].cgroup)] == Tier::TimeSensitive;
  };

  // Switch events are logged when the switch completes, so a task can leave a
  // queue before a later-logged decision elsewhere. Collect the queued spans
  // of time-sensitive tasks first, then test every background switch-in.
  struct Span {
    SimTime from, to;
    TaskId task;
    CpuId cpu;
  };
  struct Start {
    SimTime decision, logged;
    CpuId cpu;
    TaskId task;
  };
  std::vector<Span> spans;
  std::vector<Start> starts;
  std::vector<std::optional<std::pair<CpuId, SimTime>>> queued(meta.size());
  std::vector<std::optional<SimTime>> unqueued(meta.size());
  std::vector<Violation> out;
  const auto repicked = repicked_enqueues(trace, cfg.cpus, meta.size());
  for (std::size_t i = 0; i < trace.events().size(); ++i) {
    const SimEvent& e = trace.events()[i];
    switch (e.kind) {
      case EventKind::Boost: boosted.at(static_cast<std::size_t>(e.arg1)) = true; break;
      case EventKind::Unboost: boosted.at(static_cast<std::size_t>(e.arg1)) = false; break;
      case EventKind::Reassign: meta.at(static_cast<std::size_t>(e.arg1)).cgroup = static_cast<CgroupId>(e.arg2); break;
      case EventKind::Wakeup: unqueued.at(static_cast<std::size_t>(e.arg1)) = e.time; break;
      case EventKind::Enqueue: {
        const auto t = static_cast<std::size_t>(e.arg1);
        if (unqueued.at(t) && e.time - *unqueued[t] > threshold && ts(t))
          out.push_back({e.time, describe("time-sensitive task left unqueued", static_cast<TaskId>(t), e.cpu, e.time - *unqueued[t])});
        unqueued[t].reset();
        if (e.cpu >= 0 && ts(t) && !repicked[i]) queued[t] = {{e.cpu, e.time}};
        break;
      }
      case EventKind::Switch: {
        if (e.arg2 < 0) break;
        const auto next = static_cast<std::size_t>(e.arg2);
        const SimTime decision = decision_time(e);
        if (queued[next]) spans.push_back({queued[next]->second, decision, static_cast<TaskId>(next), queued[next]->first});
        queued[next].reset();
        if (!ts(next)) starts.push_back({decision, e.time, e.cpu, static_cast<TaskId>(next)});
        break;
      }
      default:
        break;
    }
  }
  for (std::size_t t = 0; t < queued.size(); ++t)
    if (queued[t]) spans.push_back({queued[t]->second, kForever, static_cast<TaskId>(t), queued[t]->first});

  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.from < b.from; });
  std::sort(starts.begin(), starts.end(), [](const Start& a, const Start& b) { return a.decision < b.decision; });
  std::vector<std::multimap<SimTime, const Span*>> active(static_cast<std::size_t>(cfg.cpus));
  std::size_t next_span = 0;
  for (const Start& st : starts) {
    while (next_span < spans.size() && spans[next_span].from < st.decision) {
      const Span& sp = spans[next_span++];
      active[static_cast<std::size_t>(sp.cpu)].emplace(sp.to, &sp);
    }
    auto& here = active[static_cast<std::size_t>(st.cpu)];
    here.erase(here.begin(), here.upper_bound(st.decision));
    for (const auto& [to, sp] : here) {
      (void)to;
      out.push_back({st.logged, describe("background task started over queued time-sensitive", sp->task, st.cpu,
                                         st.decision - sp->from)});
    }
  }
  std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) { return a.time < b.time; });
  return out;
}

std::vector<Violation> check_time_closure(const Trace& trace, const ScenarioConfig& cfg) {
  const SimTime end = run_end(trace, cfg);
  std::vector<Violation> out;
  for (const auto& e : trace.events())
    if (e.kind == EventKind::Switch && e.time > end)
      out.push_back({e.time, "switch on CPU " + std::to_string(e.cpu) + " after the run ended"});
  std::vector<CpuStats> cpus;
  try {
    cpus = attribute_cpu_time(trace, cfg, 0, end);
  } catch (const SimulationError& ex) {
    out.push_back({end, ex.what()});
    return out;
  }
  for (std::size_t c = 0; c < cpus.size(); ++c)
    if (cpus[c].total() != end)
      out.push_back({end, "CPU " + std::to_string(c) + " accounts for " + std::to_string(cpus[c].total()) +
                              " ns of " + std::to_string(end)});
  return out;
}

std::vector<Violation> check_percentiles(const MetricsReport& report) {
  std::vector<Violation> out;
  auto check = [&](const std::string& name, const GroupStats& g) {
    if (!g.p50) return;
    if (!(*g.p50 <= *g.p95 && *g.p95 <= *g.p999))
      out.push_back({report.window_end, "percentiles out of order for " + name});
  };
  for (const auto& [name, g] : report.workloads) check(name, g);
  for (const auto& [name, g] : report.cgroups) check(name, g);
  return out;
}

}  // namespace ufsim
