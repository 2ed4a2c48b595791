#include <gtest/gtest.h>

#include "ufsim/metrics.hpp"
#include "ufsim/scenario.hpp"
#include "ufsim/verify.hpp"

namespace ufsim {
namespace {

SimEvent sw(SimTime t, CpuId cpu, TaskId prev, TaskId next, SimDuration cost) {
  return {t, EventKind::Switch, cpu, prev, next, static_cast<std::int64_t>(cost)};
}

SimEvent enq(SimTime t, CpuId cpu, TaskId task, CgroupId cg) { return {t, EventKind::Enqueue, cpu, task, cg, -1}; }

SimEvent done(SimTime t, TaskId task, SimDuration latency) {
  return {t, EventKind::RequestDone, 0, task, static_cast<std::int64_t>(latency), -1};
}

Trace trace_of(std::initializer_list<SimEvent> events) {
  Trace t;
  for (const auto& e : events) t.push(e);
  return t;
}

// One CPU; task 0 "a" and task 1 "b".
ScenarioConfig two_tasks(const char* cg_a, const char* cg_b, SimDuration duration) {
  ScenarioConfig cfg;
  cfg.cpus = 1;
  cfg.cgroups.push_back({cg_a, std::nullopt, 100, 0});
  if (std::string(cg_a) != cg_b) cfg.cgroups.push_back({cg_b, std::nullopt, 100, 0});
  cfg.tasks.push_back({"a", 1, cg_a, {}, std::nullopt, 0});
  cfg.tasks.push_back({"b", 1, cg_b, {}, std::nullopt, 0});
  cfg.engine.duration = duration;
  cfg.engine.warmup = 0;
  return cfg;
}

TEST(Percentile, NearestRank) {
  std::vector<SimDuration> v;
  for (SimDuration i = 1; i <= 10; ++i) v.push_back(i);
  EXPECT_EQ(percentile(v, 500), 5U);
  EXPECT_EQ(percentile(v, 950), 10U);
  EXPECT_EQ(percentile(v, 100), 1U);
  EXPECT_EQ(percentile(v, 0), 1U);
  EXPECT_FALSE(percentile({}, 500));
  std::vector<SimDuration> k;
  for (SimDuration i = 1; i <= 1000; ++i) k.push_back(i);
  EXPECT_EQ(percentile(k, 999), 999U);
  EXPECT_EQ(percentile(k, 950), 950U);
}

TEST(Normalize, ScalesToBusiest) {
  EXPECT_EQ(normalize_to_max({80, 40}), (std::vector<double>{100.0, 50.0}));
  EXPECT_EQ(normalize_to_max({0, 0}), (std::vector<double>{0.0, 0.0}));
  EXPECT_TRUE(normalize_to_max({}).empty());
}

TEST(Attribution, SplitsIdleOverheadAndBusy) {
  const auto cfg = two_tasks("bg_x", "bg_x", 10000);
  const Trace t = trace_of({sw(1000, 0, -1, 0, 100), sw(5000, 0, 0, 1, 100)});
  const auto cpus = attribute_cpu_time(t, cfg, 0, 10000);
  ASSERT_EQ(cpus.size(), 1U);
  EXPECT_EQ(cpus[0].idle, 900U);
  EXPECT_EQ(cpus[0].overhead, 200U);
  EXPECT_EQ(cpus[0].busy.at("a"), 3900U);
  EXPECT_EQ(cpus[0].busy.at("b"), 5000U);
  EXPECT_EQ(cpus[0].total(), 10000U);

  const auto window = attribute_cpu_time(t, cfg, 2000, 6000);
  EXPECT_EQ(window[0].busy.at("a"), 2900U);
  EXPECT_EQ(window[0].overhead, 100U);
  EXPECT_EQ(window[0].busy.at("b"), 1000U);
}

TEST(Attribution, RejectsMalformedSwitches) {
  const auto cfg = two_tasks("bg_x", "bg_x", 10000);
  EXPECT_THROW(attribute_cpu_time(trace_of({sw(1000, 0, 1, 0, 0)}), cfg, 0, 10000), SimulationError);
  EXPECT_THROW(attribute_cpu_time(trace_of({sw(1000, 3, -1, 0, 0)}), cfg, 0, 10000), SimulationError);
  EXPECT_THROW(attribute_cpu_time(trace_of({sw(1000, 0, -1, 0, 0), sw(1050, 0, 0, 1, 100)}), cfg, 0, 10000),
               SimulationError);
}

TEST(Metrics, LatencyStatsFromRequestDone) {
  const auto cfg = two_tasks("bg_x", "bg_x", sec(1));
  Trace t = trace_of({sw(0, 0, -1, 0, 0)});
  for (SimDuration i = 1; i <= 10; ++i) t.push(done(ms(10 * i), 0, ms(i)));
  const MetricsReport r = compute_metrics(t, cfg);
  const GroupStats& a = r.workloads.at("a");
  EXPECT_EQ(a.completed, 10U);
  EXPECT_DOUBLE_EQ(a.throughput, 10.0);
  EXPECT_DOUBLE_EQ(*a.mean_latency, static_cast<double>(ms(11)) / 2);
  EXPECT_EQ(a.p50, ms(5));
  EXPECT_EQ(a.p95, ms(10));
  EXPECT_EQ(a.cpu_time, sec(1));
  EXPECT_EQ(r.workloads.at("b").completed, 0U);
  EXPECT_FALSE(r.workloads.at("b").p50);
  EXPECT_EQ(r.cgroups.at("bg_x").completed, 10U);
}

TEST(Metrics, WarmupExcluded) {
  auto cfg = two_tasks("bg_x", "bg_x", sec(1));
  cfg.engine.warmup = ms(500);
  Trace t;
  t.push(done(ms(100), 0, ms(1)));
  t.push(done(ms(600), 0, ms(2)));
  const MetricsReport r = compute_metrics(t, cfg);
  EXPECT_EQ(r.workloads.at("a").completed, 1U);
  EXPECT_EQ(r.measured(), ms(500));
}

TEST(Metrics, JsonKeysSorted) {
  const auto cfg = two_tasks("ts_x", "bg_y", sec(1));
  const std::string j = compute_metrics(Trace(), cfg).to_json();
  std::size_t last = 0;
  for (const char* key : {"cgroups", "cpus", "policy", "scenario", "totals", "window_end_ns", "window_start_ns",
                          "workloads"}) {
    const auto pos = j.find(std::string("\n  \"") + key + "\"");
    ASSERT_NE(pos, std::string::npos) << key;
    EXPECT_GT(pos, last) << key;
    last = pos;
  }
  EXPECT_LT(j.find("\"bg_y\""), j.find("\"ts_x\""));
}

TEST(Scenario, ParseDuration) {
  EXPECT_EQ(parse_duration("5ms"), ms(5));
  EXPECT_EQ(parse_duration("3s"), sec(3));
  EXPECT_EQ(parse_duration("7us"), us(7));
  EXPECT_EQ(parse_duration("12ns"), 12U);
  EXPECT_EQ(parse_duration("9"), 9U);
  EXPECT_THROW(parse_duration("ms"), ConfigError);
  EXPECT_THROW(parse_duration("5m"), ConfigError);
  for (SimDuration d : {SimDuration{0}, SimDuration{17}, us(3), ms(250), sec(60), ms(1500)})
    EXPECT_EQ(parse_duration(format_duration(d)), d);
}

TEST(Scenario, PresetsValidateAndRoundTrip) {
  ASSERT_FALSE(preset_names().empty());
  for (const auto& name : preset_names()) {
    const ScenarioConfig cfg = preset(name);
    EXPECT_NO_THROW(validate(cfg)) << name;
    EXPECT_EQ(cfg.name, name);
    EXPECT_EQ(parse_scenario(scenario_to_json(cfg)), cfg) << name;
    EXPECT_TRUE(is_preset(name));
  }
  EXPECT_FALSE(is_preset("nope"));
}

TEST(Scenario, ErrorsCarryLineNumbers) {
  const std::string text =
      "{\n"
      "  \"name\": \"x\",\n"
      "  \"cpus\": 2,\n"
      "  \"bogus\": 1,\n"
      "  \"cgroups\": [{\"name\": \"bg_a\"}],\n"
      "  \"tasks\": []\n"
      "}\n";
  try {
    parse_scenario(text);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
}

TEST(Scenario, BadWeightReportsItsLine) {
  const std::string text =
      "{\n"
      "  \"cpus\": 1,\n"
      "  \"cgroups\": [\n"
      "    {\"name\": \"bg_a\",\n"
      "     \"weight\": 0}\n"
      "  ],\n"
      "  \"tasks\": []\n"
      "}\n";
  try {
    parse_scenario(text);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 5);
  }
}

TEST(Scenario, MalformedJsonReportsLine) {
  try {
    parse_scenario("{\n  \"cpus\": 1,\n  \"tasks\": [,]\n}\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Scenario, SemanticChecks) {
  auto cfg = two_tasks("ts_x", "ts_y", sec(1));
  EXPECT_NO_THROW(validate(cfg));
  EXPECT_THROW(with_policy(cfg, PolicyKind::Idle), ConfigError);

  auto bad = cfg;
  bad.tasks[0].cgroup = "ts_missing";
  EXPECT_THROW(validate(bad), ConfigError);
  bad = cfg;
  bad.tasks[0].affinity = std::vector<CpuId>{3};
  EXPECT_THROW(validate(bad), ConfigError);
  bad = cfg;
  bad.engine.warmup = sec(2);
  EXPECT_THROW(validate(bad), ConfigError);
  bad = cfg;
  bad.cgroups[0].name = "x";
  EXPECT_THROW(validate(bad), ConfigError);
  EXPECT_THROW(policy_from_string("cfs"), ConfigError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ConfigError);
}

TEST(Scenario, RealTimePoliciesAssignPriorities) {
  const auto cfg = with_policy(two_tasks("ts_x", "bg_y", sec(1)), PolicyKind::Fifo);
  EXPECT_EQ(cfg.cgroups[0].rt_priority, cfg.policy_params.rt_priority);
  EXPECT_EQ(cfg.cgroups[1].rt_priority, 0);
}

TEST(TraceCsv, RoundTrip) {
  const Trace t = trace_of({sw(5, 0, -1, 0, 5), enq(7, -1, 1, 0), done(9, 0, 4)});
  std::istringstream is(t.to_csv());
  EXPECT_EQ(Trace::read_csv(is).events(), t.events());
  EXPECT_EQ(t.to_csv().substr(0, t.to_csv().find('\n')), "time_ns,cpu,kind,arg1,arg2,arg3");
}

TEST(Verify, IdleCpuBesideWaitingTask) {
  const auto cfg = two_tasks("bg_x", "bg_x", ms(10));
  const Trace late = trace_of({enq(ms(1), -1, 0, 0), sw(ms(5), 0, -1, 0, us(5))});
  EXPECT_EQ(check_work_conservation(late, cfg).size(), 1U);
  const Trace prompt = trace_of({enq(ms(1), -1, 0, 0), sw(ms(1) + us(5), 0, -1, 0, us(5))});
  EXPECT_TRUE(check_work_conservation(prompt, cfg).empty());
}

TEST(Verify, AffinityLimitsWorkConservation) {
  auto cfg = two_tasks("bg_x", "bg_x", ms(10));
  cfg.cpus = 2;
  cfg.tasks[0].affinity = std::vector<CpuId>{0};
  // CPU 1 stays idle while task 0 waits, but task 0 may not run there.
  const Trace t = trace_of({sw(0, 0, -1, 1, 0), enq(ms(1), 0, 0, -1)});
  const auto v = check_work_conservation(t, cfg);
  EXPECT_TRUE(v.empty());
}

TEST(Verify, BackgroundOverQueuedTimeSensitive) {
  const auto cfg = two_tasks("ts_x", "bg_y", ms(10));
  const Trace bad = trace_of({enq(us(500), 0, 0, -1), enq(us(500), -1, 1, 1), sw(ms(1) + us(5), 0, -1, 1, us(5)),
                              sw(ms(2) + us(5), 0, 1, 0, us(5))});
  EXPECT_EQ(check_tier_precedence(bad, cfg).size(), 1U);
  const Trace good = trace_of({enq(us(500), 0, 0, -1), enq(us(500), -1, 1, 1), sw(us(505), 0, -1, 0, us(5)),
                               sw(ms(2) + us(5), 0, 0, 1, us(5))});
  EXPECT_TRUE(check_tier_precedence(good, cfg).empty());
}

TEST(Verify, BoostedHolderMayRunAheadOfTimeSensitive) {
  const auto cfg = two_tasks("ts_x", "bg_y", ms(10));
  const Trace t = trace_of({{us(400), EventKind::Boost, -1, 1, 0, -1}, enq(us(500), 0, 0, -1),
                            enq(us(500), 0, 1, -1), sw(ms(1) + us(5), 0, -1, 1, us(5))});
  EXPECT_TRUE(check_tier_precedence(t, cfg).empty());
}

TEST(Verify, TimeClosure) {
  const auto cfg = two_tasks("bg_x", "bg_x", ms(10));
  EXPECT_TRUE(check_time_closure(trace_of({sw(ms(1), 0, -1, 0, us(5))}), cfg).empty());
  EXPECT_EQ(check_time_closure(trace_of({sw(ms(12), 0, -1, 0, us(5))}), cfg).size(), 1U);
  EXPECT_EQ(check_time_closure(trace_of({sw(ms(1), 0, -1, 0, us(5)), sw(ms(2), 0, 1, 0, us(5))}), cfg).size(), 1U);
}

TEST(Verify, PercentileOrder) {
  MetricsReport r;
  r.workloads["a"].p50 = 5;
  r.workloads["a"].p95 = 4;
  r.workloads["a"].p999 = 9;
  r.workloads["b"].p50 = 1;
  r.workloads["b"].p95 = 2;
  r.workloads["b"].p999 = 2;
  const auto v = check_percentiles(r);
  ASSERT_EQ(v.size(), 1U);
  EXPECT_NE(v[0].what.find("a"), std::string::npos);
}

}  // namespace
}  // namespace ufsim
