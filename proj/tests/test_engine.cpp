#include <gtest/gtest.h>

#include <map>

#include "ufsim/engine.hpp"
#include "ufsim/metrics.hpp"
#include "ufsim/workload.hpp"

namespace ufsim {
namespace {

WorkloadSpec bound_work(SimDuration iteration = ms(250)) {
  WorkloadSpec w;
  w.kind = WorkloadKind::Bound;
  w.bound.iteration_work = iteration;
  return w;
}

ScenarioConfig one_cpu(std::vector<CgroupSpec> groups, std::vector<TaskSpec> tasks, PolicyKind policy,
                       SimDuration duration) {
  ScenarioConfig cfg;
  cfg.name = "unit";
  cfg.cpus = 1;
  cfg.cgroups = std::move(groups);
  cfg.tasks = std::move(tasks);
  cfg.engine.duration = duration;
  cfg.engine.warmup = 0;
  return with_policy(cfg, policy);
}

std::map<std::string, SimDuration> busy_by_workload(const RunResult& r, const ScenarioConfig& cfg) {
  return attribute_cpu_time(r.trace, cfg, 0, r.end_time).at(0).busy;
}

std::size_t count(const Trace& t, EventKind kind) {
  std::size_t n = 0;
  for (const auto& e : t.events()) n += e.kind == kind;
  return n;
}

TEST(Rng, DeterministicPerTask) {
  Rng a(1, 3), b(1, 3), c(1, 4), d(2, 3);
  bool differs_task = false, differs_seed = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs_task |= x != c.next();
    differs_seed |= x != d.next();
  }
  EXPECT_TRUE(differs_task);
  EXPECT_TRUE(differs_seed);
}

TEST(Rng, UniformInUnitInterval) {
  Rng r(7, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Distribution, SampleMeansMatchExpected) {
  Rng r(11, 0);
  const int n = 200000;
  for (const auto& d : {Distribution::exponential(ms(1)), Distribution::uniform(ms(2), ms(4))}) {
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(d.sample(r));
    EXPECT_NEAR(sum / n, static_cast<double>(d.expected()), 0.01 * static_cast<double>(d.expected()));
  }
  EXPECT_EQ(Distribution::constant(ms(3)).sample(r), ms(3));
  EXPECT_EQ(Distribution::uniform(ms(2), ms(4)).expected(), ms(3));
}

TEST(BurstyClient, LatencyIncludesQueueingAfterThink) {
  BurstyParams p{Distribution::constant(ms(2)), Distribution::constant(ms(1))};
  BurstyClient c(p, ms(10));
  Rng rng(1, 0);
  StepContext ctx{ms(10), false, 0, &rng};
  Action a = c.next(ctx);
  ASSERT_TRUE(std::holds_alternative<action::Compute>(a));
  EXPECT_EQ(std::get<action::Compute>(a).amount, ms(2));

  ctx.now = ms(13);  // one millisecond spent waiting for a CPU
  a = c.next(ctx);
  ASSERT_TRUE(std::holds_alternative<action::Complete>(a));
  EXPECT_EQ(std::get<action::Complete>(a).latency, ms(3));

  a = c.next(ctx);
  ASSERT_TRUE(std::holds_alternative<action::Sleep>(a));
  EXPECT_EQ(std::get<action::Sleep>(a).amount, ms(1));
  EXPECT_EQ(std::get<action::Sleep>(a).reason, BlockReason::ClientThink);

  ctx.now = ms(14);
  a = c.next(ctx);
  ASSERT_TRUE(std::holds_alternative<action::Compute>(a));
  ctx.now = ms(16);
  a = c.next(ctx);
  EXPECT_EQ(std::get<action::Complete>(a).latency, ms(2));
  EXPECT_EQ(c.issued(), 2U);
  EXPECT_EQ(c.completed(), 2U);
}

TEST(BoundLoop, CompletesEachIteration) {
  BoundLoop b(BoundParams{ms(250), "query"});
  Rng rng(1, 0);
  StepContext ctx{0, false, 0, &rng};
  EXPECT_EQ(std::get<action::Compute>(b.next(ctx)).amount, ms(250));
  ctx.now = ms(400);
  EXPECT_EQ(std::get<action::Complete>(b.next(ctx)).latency, ms(400));
  EXPECT_TRUE(std::holds_alternative<action::Compute>(b.next(ctx)));
}

TEST(SpinLockUser, BacksOffExponentiallyThenPanics) {
  SpinLockParams p;
  p.spin_attempts_before_sleep = 10;
  p.spin_cost = us(1);
  p.sleep_initial = ms(1);
  p.sleep_cap = ms(4);
  p.panic_threshold = 5;
  SpinLockUser w(p, 0, false, 0);
  Rng rng(1, 0);
  StepContext ctx{0, false, 0, &rng};
  std::vector<SimDuration> sleeps;
  for (int round = 1; round <= 5; ++round) {
    EXPECT_FALSE(std::get<action::TryLock>(w.next(ctx)).final_check);
    EXPECT_EQ(std::get<action::Compute>(w.next(ctx)).amount, us(10));
    EXPECT_TRUE(std::get<action::TryLock>(w.next(ctx)).final_check);
    ctx.lock_failures = round;
    const Action a = w.next(ctx);
    if (round < 5) {
      sleeps.push_back(std::get<action::Sleep>(a).amount);
    } else {
      EXPECT_EQ(std::get<action::Panic>(a).failures, 5);
    }
  }
  EXPECT_EQ(sleeps, (std::vector<SimDuration>{ms(1), ms(2), ms(4), ms(4)}));
}

TEST(SpinLockUser, HolderWorksThenReleases) {
  SpinLockParams p;
  p.holder_work = ms(30);
  SpinLockUser w(p, 2, true, ms(5));
  Rng rng(1, 0);
  StepContext ctx{ms(5), false, 0, &rng};
  EXPECT_EQ(std::get<action::TryLock>(w.next(ctx)).lock, 2);
  ctx.last_lock_ok = true;
  EXPECT_EQ(std::get<action::Compute>(w.next(ctx)).amount, ms(30));
  EXPECT_EQ(std::get<action::Unlock>(w.next(ctx)).lock, 2);
  ctx.now = ms(40);
  EXPECT_EQ(std::get<action::Complete>(w.next(ctx)).latency, ms(35));
  EXPECT_TRUE(std::holds_alternative<action::Exit>(w.next(ctx)));
}

TEST(Engine, SingleBoundTaskSwitchesOnce) {
  for (auto policy : {PolicyKind::Ufs, PolicyKind::Eevdf, PolicyKind::Fifo, PolicyKind::Rr}) {
    const auto cfg = one_cpu({{"bg_a", std::nullopt, 100, 0}}, {{"loop", 1, "bg_a", bound_work()}}, policy, sec(1));
    const RunResult r = simulate(cfg);
    EXPECT_EQ(count(r.trace, EventKind::Switch), 1U) << to_string(policy);
    EXPECT_EQ(count(r.trace, EventKind::RequestDone), 3U) << to_string(policy);
  }
}

TEST(Engine, EqualTasksShareOneCpu) {
  const auto cfg = one_cpu({{"bg_a", std::nullopt, 100, 0}},
                           {{"a", 1, "bg_a", bound_work()}, {"b", 1, "bg_a", bound_work()}}, PolicyKind::Ufs,
                           ms(100));
  const RunResult r = simulate(cfg);
  const auto busy = busy_by_workload(r, cfg);
  EXPECT_NEAR(static_cast<double>(busy.at("a")), static_cast<double>(ms(50)), static_cast<double>(ms(4)));
  EXPECT_NEAR(static_cast<double>(busy.at("b")), static_cast<double>(ms(50)), static_cast<double>(ms(4)));
}

TEST(Engine, DeterministicForSameSeed) {
  auto cfg = preset("min_max");
  cfg.engine.duration = sec(1);
  cfg.engine.warmup = 0;
  const RunResult a = simulate(cfg);
  const RunResult b = simulate(cfg);
  EXPECT_EQ(a.trace.to_csv(), b.trace.to_csv());
  cfg.engine.rng_seed = 2;
  EXPECT_NE(simulate(cfg).trace.to_csv(), a.trace.to_csv());
}

TEST(Engine, ClosedLoopClientsHaveOneRequestOutstanding) {
  auto cfg = preset("solo_bursty");
  cfg.engine.duration = sec(1);
  cfg.engine.warmup = 0;
  const RunResult r = simulate(cfg);
  std::vector<int> since_wakeup(static_cast<std::size_t>(cfg.task_count()), 1);
  std::size_t done = 0;
  for (const auto& e : r.trace.events()) {
    if (e.kind == EventKind::Wakeup) since_wakeup.at(static_cast<std::size_t>(e.arg1)) = 0;
    if (e.kind != EventKind::RequestDone) continue;
    ++done;
    EXPECT_EQ(since_wakeup.at(static_cast<std::size_t>(e.arg1))++, 0) << "task " << e.arg1 << " at " << e.time;
  }
  EXPECT_GT(done, 100U);
}

TEST(Engine, SwitchesCarryContextSwitchCost) {
  const auto cfg = one_cpu({{"bg_a", std::nullopt, 100, 0}},
                           {{"a", 1, "bg_a", bound_work()}, {"b", 1, "bg_a", bound_work()}}, PolicyKind::Eevdf,
                           ms(50));
  const RunResult r = simulate(cfg);
  for (const auto& e : r.trace.events())
    if (e.kind == EventKind::Switch) EXPECT_EQ(static_cast<SimDuration>(e.arg3), cfg.engine.ctx_switch_cost);
}

TEST(Engine, PanicStopsTheRun) {
  const auto cfg = with_policy(preset("lock_inversion"), PolicyKind::Eevdf);
  const RunResult r = simulate(cfg);
  ASSERT_TRUE(r.panicked);
  const auto& ev = r.trace.events();
  const auto it = std::find_if(ev.begin(), ev.end(), [](const SimEvent& e) { return e.kind == EventKind::Panic; });
  ASSERT_NE(it, ev.end());
  EXPECT_EQ(r.end_time, it->time);
  EXPECT_EQ(it->arg2, cfg.tasks.back().workload.lock.panic_threshold);
  for (const auto& e : ev) EXPECT_LE(e.time, it->time);
  EXPECT_LT(r.end_time, cfg.engine.duration);
}

TEST(Engine, TaskStatesEndValid) {
  const auto cfg = with_policy(preset("lock_inversion"), PolicyKind::Ufs);
  const RunResult r = simulate(cfg);
  EXPECT_FALSE(r.panicked);
  for (const auto& t : r.tasks) EXPECT_NE(t.state, TaskState::Panicked);
}

TEST(RealTime, FifoMonopolizes) {
  const auto cfg = one_cpu({{"ts_a", std::nullopt, 100, 0}},
                           {{"a", 1, "ts_a", bound_work()}, {"b", 1, "ts_a", bound_work()}}, PolicyKind::Fifo,
                           sec(1));
  const auto busy = busy_by_workload(simulate(cfg), cfg);
  EXPECT_GT(busy.at("a"), ms(999));
  EXPECT_EQ(busy.count("b") ? busy.at("b") : 0, 0U);
}

TEST(RealTime, RoundRobinAlternatesPerQuantum) {
  const auto cfg = one_cpu({{"ts_a", std::nullopt, 100, 0}},
                           {{"a", 1, "ts_a", bound_work()}, {"b", 1, "ts_a", bound_work()}}, PolicyKind::Rr,
                           sec(1));
  const RunResult r = simulate(cfg);
  const auto busy = busy_by_workload(r, cfg);
  EXPECT_NEAR(static_cast<double>(busy.at("a")), static_cast<double>(ms(500)), static_cast<double>(ms(100)));
  EXPECT_NEAR(static_cast<double>(busy.at("b")), static_cast<double>(ms(500)), static_cast<double>(ms(100)));
  // One initial switch, then one per 100ms quantum.
  const auto switches = count(r.trace, EventKind::Switch);
  EXPECT_GE(switches, 9U);
  EXPECT_LE(switches, 11U);
}

TEST(RealTime, FairServerFeedsStarvedNormalTask) {
  for (auto policy : {PolicyKind::Fifo, PolicyKind::Rr}) {
    const auto cfg = one_cpu({{"ts_a", std::nullopt, 100, 0}, {"bg_b", std::nullopt, 100, 0}},
                             {{"rt", 1, "ts_a", bound_work()}, {"normal", 1, "bg_b", bound_work()}}, policy,
                             sec(2));
    const auto busy = busy_by_workload(simulate(cfg), cfg);
    EXPECT_GE(busy.at("normal"), ms(95)) << to_string(policy);
    EXPECT_LE(busy.at("normal"), ms(150)) << to_string(policy);
  }
}

}  // namespace
}  // namespace ufsim
