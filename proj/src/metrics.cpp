#include "ufsim/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace ufsim {

using nlohmann::json;

std::optional<SimDuration> percentile(const std::vector<SimDuration>& sorted, unsigned per_mille) {
  if (sorted.empty()) return std::nullopt;
  const std::size_t n = sorted.size();
  std::size_t rank = (per_mille * n + 999) / 1000;
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

SimDuration CpuStats::total() const {
  SimDuration busy_sum = 0;
  for (const auto& [name, t] : busy) busy_sum += t;
  return busy_sum + idle + overhead;
}

std::vector<double> normalize_to_max(const std::vector<SimDuration>& v) {
  const SimDuration top = v.empty() ? 0 : *std::max_element(v.begin(), v.end());
  std::vector<double> out;
  out.reserve(v.size());
  for (SimDuration x : v) out.push_back(top == 0 ? 0.0 : 100.0 * static_cast<double>(x) / static_cast<double>(top));
  return out;
}

std::vector<double> MetricsReport::normalized_utilization(const std::string& workload) const {
  std::vector<SimDuration> busy;
  for (const auto& c : cpus) {
    auto it = c.busy.find(workload);
    busy.push_back(it == c.busy.end() ? 0 : it->second);
  }
  return normalize_to_max(busy);
}

namespace {

struct TaskInfo {
  std::string workload;
  CgroupId cgroup;
};

std::vector<TaskInfo> task_table(const ScenarioConfig& cfg) {
  std::map<std::string, CgroupId> ids;
  for (std::size_t i = 0; i < cfg.cgroups.size(); ++i) ids[cfg.cgroups[i].name] = static_cast<CgroupId>(i);
  std::vector<TaskInfo> out;
  for (const auto& spec : cfg.tasks)
    for (int k = 0; k < spec.count; ++k) out.push_back({spec.name, ids.at(spec.cgroup)});
  return out;
}

SimTime end_of_run(const Trace& trace, const ScenarioConfig& cfg) {
  for (const auto& e : trace.events())
    if (e.kind == EventKind::Panic) return e.time;
  return cfg.engine.duration;
}

SimDuration overlap(SimTime a, SimTime b, SimTime from, SimTime to) {
  const SimTime lo = std::max(a, from);
  const SimTime hi = std::min(b, to);
  return hi > lo ? hi - lo : 0;
}

// Walks switch events and reports each occupancy interval to `sink(cpu, task, a, b, overhead)`.
template <typename Sink>
void walk_switches(const Trace& trace, int ncpus, SimTime end, Sink&& sink) {
  std::vector<TaskId> occupant(static_cast<std::size_t>(ncpus), kNoTask);
  std::vector<SimTime> since(static_cast<std::size_t>(ncpus), 0);
  for (const auto& e : trace.events()) {
    if (e.kind != EventKind::Switch) continue;
    if (e.cpu < 0 || e.cpu >= ncpus) throw SimulationError("malformed trace: switch on unknown CPU");
    const auto c = static_cast<std::size_t>(e.cpu);
    if (e.arg1 != occupant[c])
      throw SimulationError("malformed trace: switch at " + std::to_string(e.time) + " on CPU " +
                            std::to_string(e.cpu) + " from task " + std::to_string(e.arg1) +
                            " but CPU held task " + std::to_string(occupant[c]));
    const auto cost = static_cast<SimDuration>(std::max<std::int64_t>(0, e.arg3));
    if (e.time < since[c] + cost) throw SimulationError("malformed trace: overlapping switches");
    sink(e.cpu, occupant[c], since[c], e.time - cost, false);
    sink(e.cpu, kNoTask, e.time - cost, e.time, true);
    occupant[c] = static_cast<TaskId>(e.arg2);
    since[c] = e.time;
  }
  for (std::size_t c = 0; c < occupant.size(); ++c)
    sink(static_cast<CpuId>(c), occupant[c], std::min(since[c], end), end, false);
}

}  // namespace

std::vector<CpuStats> attribute_cpu_time(const Trace& trace, const ScenarioConfig& cfg, SimTime from,
                                         SimTime to) {
  const auto tasks = task_table(cfg);
  std::vector<CpuStats> cpus(static_cast<std::size_t>(cfg.cpus));
  walk_switches(trace, cfg.cpus, to, [&](CpuId c, TaskId t, SimTime a, SimTime b, bool is_overhead) {
    const SimDuration d = overlap(a, b, from, to);
    CpuStats& s = cpus[static_cast<std::size_t>(c)];
    if (is_overhead) s.overhead += d;
    else if (t == kNoTask) s.idle += d;
    else s.busy[tasks.at(static_cast<std::size_t>(t)).workload] += d;
  });
  return cpus;
}

MetricsReport compute_metrics(const Trace& trace, const ScenarioConfig& cfg) {
  const auto tasks = task_table(cfg);
  MetricsReport r;
  r.scenario = cfg.name;
  r.policy = std::string(to_string(cfg.policy));
  r.window_end = end_of_run(trace, cfg);
  r.window_start = std::min(cfg.engine.warmup, r.window_end);
  const SimTime from = r.window_start;
  const SimTime to = r.window_end;

  std::vector<CgroupId> cgroup_of;
  for (const auto& t : tasks) cgroup_of.push_back(t.cgroup);
  auto cg_name = [&](CgroupId id) { return cfg.cgroups.at(static_cast<std::size_t>(id)).name; };

  std::map<std::string, std::vector<SimDuration>> lat_w, lat_c, wake_w, wake_c;
  for (const auto& t : tasks) {
    r.workloads[t.workload];
    lat_w[t.workload];
    wake_w[t.workload];
  }
  for (const auto& g : cfg.cgroups) {
    r.cgroups[g.name];
    lat_c[g.name];
    wake_c[g.name];
  }

  std::vector<std::optional<SimTime>> woke(tasks.size());
  std::vector<CpuId> last_cpu(tasks.size(), kNoCpu);
  for (const auto& e : trace.events()) {
    if (e.time > to) break;
    const bool in_window = e.time >= from;
    switch (e.kind) {
      case EventKind::Reassign:
        cgroup_of.at(static_cast<std::size_t>(e.arg1)) = static_cast<CgroupId>(e.arg2);
        break;
      case EventKind::RequestDone:
        if (in_window) {
          const auto t = static_cast<std::size_t>(e.arg1);
          lat_w[tasks.at(t).workload].push_back(static_cast<SimDuration>(e.arg2));
          lat_c[cg_name(cgroup_of[t])].push_back(static_cast<SimDuration>(e.arg2));
        }
        break;
      case EventKind::Wakeup:
        woke.at(static_cast<std::size_t>(e.arg1)) = e.time;
        break;
      case EventKind::Switch: {
        if (e.arg2 < 0) break;
        const auto t = static_cast<std::size_t>(e.arg2);
        if (woke.at(t)) {
          if (in_window) {
            wake_w[tasks[t].workload].push_back(e.time - *woke[t]);
            wake_c[cg_name(cgroup_of[t])].push_back(e.time - *woke[t]);
          }
          woke[t].reset();
        }
        if (in_window && last_cpu[t] != kNoCpu && last_cpu[t] != e.cpu) ++r.migrations;
        last_cpu[t] = e.cpu;
        break;
      }
      case EventKind::Boost: ++r.boosts; break;
      case EventKind::Unboost: ++r.unboosts; break;
      case EventKind::Panic:
        ++r.panics;
        r.panic_failures = e.arg2;
        break;
      case EventKind::Diag:
        if (e.arg1 == static_cast<std::int64_t>(DiagCode::DispatchRetryExhausted)) ++r.dispatch_retry_exhausted;
        if (e.arg1 == static_cast<std::int64_t>(DiagCode::BoostLeak)) ++r.boost_leaks;
        break;
      default:
        break;
    }
  }

  // CPU time per cgroup follows reassignments, so replay them alongside the switches.
  std::vector<CgroupId> cg_now;
  for (const auto& t : tasks) cg_now.push_back(t.cgroup);
  std::vector<std::pair<SimTime, std::pair<TaskId, CgroupId>>> moves;
  for (const auto& e : trace.events())
    if (e.kind == EventKind::Reassign) moves.push_back({e.time, {static_cast<TaskId>(e.arg1), static_cast<CgroupId>(e.arg2)}});
  r.cpus.assign(static_cast<std::size_t>(cfg.cpus), {});
  walk_switches(trace, cfg.cpus, to, [&](CpuId c, TaskId t, SimTime a, SimTime b, bool is_overhead) {
    CpuStats& s = r.cpus[static_cast<std::size_t>(c)];
    const SimDuration d = overlap(a, b, from, to);
    if (is_overhead) {
      s.overhead += d;
      return;
    }
    if (t == kNoTask) {
      s.idle += d;
      return;
    }
    s.busy[tasks.at(static_cast<std::size_t>(t)).workload] += d;
    r.workloads[tasks[static_cast<std::size_t>(t)].workload].cpu_time += d;
    // Split the interval at reassignments of this task.
    SimTime cursor = a;
    CgroupId cg = tasks[static_cast<std::size_t>(t)].cgroup;
    for (const auto& [when, mv] : moves) {
      if (mv.first != t) continue;
      if (when <= cursor) {
        cg = mv.second;
        continue;
      }
      if (when >= b) break;
      r.cgroups[cg_name(cg)].cpu_time += overlap(cursor, when, from, to);
      cursor = when;
      cg = mv.second;
    }
    r.cgroups[cg_name(cg)].cpu_time += overlap(cursor, b, from, to);
  });

  const double secs = static_cast<double>(to - from) / 1e9;
  auto fill = [&](GroupStats& g, std::vector<SimDuration>& lat, std::vector<SimDuration>& wake) {
    std::sort(lat.begin(), lat.end());
    std::sort(wake.begin(), wake.end());
    g.completed = lat.size();
    g.throughput = secs > 0 ? static_cast<double>(lat.size()) / secs : 0.0;
    if (!lat.empty()) {
      long double sum = 0;
      for (SimDuration x : lat) sum += static_cast<long double>(x);
      g.mean_latency = static_cast<double>(sum / static_cast<long double>(lat.size()));
    }
    g.p50 = percentile(lat, 500);
    g.p95 = percentile(lat, 950);
    g.p999 = percentile(lat, 999);
    g.wakeup_p999 = percentile(wake, 999);
  };
  for (auto& [name, g] : r.workloads) fill(g, lat_w[name], wake_w[name]);
  for (auto& [name, g] : r.cgroups) fill(g, lat_c[name], wake_c[name]);
  return r;
}

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json group_json(const GroupStats& g) {
  return {{"completed", g.completed},
          {"throughput_per_s", g.throughput},
          {"mean_latency_ns", opt(g.mean_latency)},
          {"p50_ns", opt(g.p50)},
          {"p95_ns", opt(g.p95)},
          {"p99_9_ns", opt(g.p999)},
          {"wakeup_p99_9_ns", opt(g.wakeup_p999)},
          {"cpu_time_ns", g.cpu_time}};
}

template <typename T>
std::string csv_opt(const std::optional<T>& v) {
  if (!v) return "";
  std::ostringstream os;
  os << *v;
  return os.str();
}

}  // namespace

std::string MetricsReport::to_json() const {
  json j;
  j["scenario"] = scenario;
  j["policy"] = policy;
  j["window_start_ns"] = window_start;
  j["window_end_ns"] = window_end;
  j["workloads"] = json::object();
  for (const auto& [name, g] : workloads) j["workloads"][name] = group_json(g);
  j["cgroups"] = json::object();
  for (const auto& [name, g] : cgroups) j["cgroups"][name] = group_json(g);
  j["cpus"] = json::array();
  for (const auto& c : cpus) {
    json cj = {{"idle_ns", c.idle}, {"overhead_ns", c.overhead}, {"busy_ns", json::object()}};
    for (const auto& [name, t] : c.busy) cj["busy_ns"][name] = t;
    j["cpus"].push_back(std::move(cj));
  }
  j["totals"] = {{"migrations", migrations},
                 {"boosts", boosts},
                 {"unboosts", unboosts},
                 {"panics", panics},
                 {"panic_failures", opt(panic_failures)},
                 {"dispatch_retry_exhausted", dispatch_retry_exhausted},
                 {"boost_leaks", boost_leaks}};
  return j.dump(2) + "\n";
}

std::string MetricsReport::to_csv() const {
  std::ostringstream os;
  os << "kind,name,completed,throughput_per_s,mean_latency_ns,p50_ns,p95_ns,p99_9_ns,wakeup_p99_9_ns,cpu_time_ns\n";
  auto row = [&](const char* kind, const std::string& name, const GroupStats& g) {
    os << kind << ',' << name << ',' << g.completed << ',' << g.throughput << ',' << csv_opt(g.mean_latency)
       << ',' << csv_opt(g.p50) << ',' << csv_opt(g.p95) << ',' << csv_opt(g.p999) << ','
       << csv_opt(g.wakeup_p999) << ',' << g.cpu_time << '\n';
  };
  for (const auto& [name, g] : workloads) row("workload", name, g);
  for (const auto& [name, g] : cgroups) row("cgroup", name, g);
  return os.str();
}

}  // namespace ufsim
