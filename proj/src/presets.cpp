#include <algorithm>
#include <array>

#include "ufsim/scenario.hpp"

namespace ufsim {
namespace {

constexpr std::array<const char*, 9> kPresets = {
    "solo_bursty",  "solo_bound",    "min_max",        "fifty_fifty",
    "oversub_16",   "oversub_24",    "mixed_weights",  "lock_inversion",
    "lock_inversion_baseline"};

WorkloadSpec bursty() {
  WorkloadSpec w;
  w.kind = WorkloadKind::Bursty;
  return w;
}

WorkloadSpec bound(const std::string& label = "query") {
  WorkloadSpec w;
  w.kind = WorkloadKind::Bound;
  w.bound.label = label;
  return w;
}

ScenarioConfig base(const std::string& name) {
  ScenarioConfig cfg;
  cfg.name = name;
  cfg.cpus = 8;
  return cfg;
}

// Time-sensitive bursty clients at weight 10k against background loops at weight 1.
ScenarioConfig min_max_like(const std::string& name, int clients) {
  ScenarioConfig cfg = base(name);
  cfg.cgroups = {{"ts_hi", std::nullopt, 10000, 0}, {"bg_lo", std::nullopt, 1, 0}};
  cfg.tasks = {{"bursty", clients, "ts_hi", bursty(), std::nullopt, 0},
               {"bound", 8, "bg_lo", bound(), std::nullopt, 0}};
  return cfg;
}

ScenarioConfig inversion(bool with_burner) {
  ScenarioConfig cfg = base(with_burner ? "lock_inversion" : "lock_inversion_baseline");
  cfg.engine.duration = sec(200);
  cfg.engine.warmup = 0;
  cfg.cgroups = {{"ts_app", std::nullopt, 10000, 0}, {"bg_batch", std::nullopt, 1, 0}};
  WorkloadSpec holder;
  holder.kind = WorkloadKind::LockHolder;
  WorkloadSpec waiter;
  waiter.kind = WorkloadKind::LockWaiter;
  const std::vector<CpuId> cpu0 = {0};
  cfg.tasks = {{"holder", 1, "bg_batch", holder, cpu0, 0},
               {"waiter", 1, "ts_app", waiter, cpu0, ms(1)}};
  if (with_burner) cfg.tasks.push_back({"burner", 1, "ts_app", bound("burner"), cpu0, ms(2)});
  return cfg;
}

}  // namespace

std::vector<std::string> preset_names() { return {kPresets.begin(), kPresets.end()}; }

bool is_preset(const std::string& name) {
  return std::find(kPresets.begin(), kPresets.end(), name) != kPresets.end();
}

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig cfg;
  if (name == "solo_bursty") {
    cfg = base(name);
    cfg.cgroups = {{"ts_hi", std::nullopt, 10000, 0}};
    cfg.tasks = {{"bursty", 8, "ts_hi", bursty(), std::nullopt, 0}};
  } else if (name == "solo_bound") {
    cfg = base(name);
    cfg.cgroups = {{"bg_lo", std::nullopt, 1, 0}};
    cfg.tasks = {{"bound", 8, "bg_lo", bound(), std::nullopt, 0}};
  } else if (name == "min_max") {
    cfg = min_max_like(name, 8);
  } else if (name == "fifty_fifty") {
    cfg = base(name);
    cfg.cgroups = {{"ts_bursty", std::nullopt, 10000, 0}, {"ts_bound", std::nullopt, 10000, 0}};
    cfg.tasks = {{"bursty", 8, "ts_bursty", bursty(), std::nullopt, 0},
                 {"bound", 8, "ts_bound", bound(), std::nullopt, 0}};
  } else if (name == "oversub_16") {
    cfg = min_max_like(name, 16);
  } else if (name == "oversub_24") {
    cfg = min_max_like(name, 24);
  } else if (name == "mixed_weights") {
    cfg = base(name);
    cfg.cgroups = {{"ts_lo", std::nullopt, 6667, 0}, {"ts_hi", std::nullopt, 10000, 0},
                   {"bg_lo", std::nullopt, 2, 0}, {"bg_hi", std::nullopt, 3, 0}};
    // Bursty clients keep CPUs 6 and 7 free of time-sensitive work so both
    // tiers are contended at once.
    const std::vector<CpuId> ts_cpus = {0, 1, 2, 3, 4, 5};
    cfg.tasks = {{"bursty_lo", 8, "ts_lo", bursty(), ts_cpus, 0},
                 {"bursty_hi", 8, "ts_hi", bursty(), ts_cpus, 0},
                 {"bound_lo", 8, "bg_lo", bound(), std::nullopt, 0},
                 {"bound_hi", 8, "bg_hi", bound(), std::nullopt, 0}};
  } else if (name == "lock_inversion") {
    cfg = inversion(true);
  } else if (name == "lock_inversion_baseline") {
    cfg = inversion(false);
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  validate(cfg);
  return cfg;
}

ScenarioConfig with_policy(ScenarioConfig cfg, PolicyKind policy) {
  cfg.policy = policy;
  if (policy == PolicyKind::Fifo || policy == PolicyKind::Rr) {
    for (auto& g : cfg.cgroups)
      if (g.rt_priority == 0 && CgroupTree::tier_from_name(g.name) == Tier::TimeSensitive)
        g.rt_priority = cfg.policy_params.rt_priority;
  }
  validate(cfg);
  return cfg;
}

}  // namespace ufsim
