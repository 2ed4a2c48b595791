#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "ufsim/engine.hpp"
#include "ufsim/matrix.hpp"
#include "ufsim/ufs_policy.hpp"
#include "ufsim/verify.hpp"

namespace ufsim {
namespace {

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double ratio(double a, double b) { return b > 0 ? a / b : (a > 0 ? HUGE_VAL : 0.0); }

class Runner {
 public:
  Runner(std::uint64_t seed, const std::function<void(const std::string&)>& progress)
      : seed_(seed), progress_(progress) {}

  const MetricsReport& get(const std::string& name, PolicyKind policy, bool hinting = true) {
    const std::string key = name + "/" + std::string(to_string(policy)) + (hinting ? "" : "/nohint");
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    if (progress_) progress_(key);
    ScenarioConfig cfg = with_policy(preset(name), policy);
    cfg.engine.rng_seed = seed_;
    cfg.hinting = hinting;
    return cache_.emplace(key, run_report(cfg)).first->second;
  }

 private:
  std::uint64_t seed_;
  std::function<void(const std::string&)> progress_;
  std::map<std::string, MetricsReport> cache_;
};

double thr(const MetricsReport& r, const std::string& w) { return r.workloads.at(w).throughput; }
double p95(const MetricsReport& r, const std::string& w) {
  const auto& g = r.workloads.at(w);
  return g.p95 ? static_cast<double>(*g.p95) : 0.0;
}
double latency(const MetricsReport& r, const std::string& w) {
  const auto& g = r.workloads.at(w);
  return g.mean_latency ? *g.mean_latency : -1.0;
}

double util_skew(const MetricsReport& r, const std::string& w) {
  SimDuration lo = ~SimDuration{0};
  SimDuration hi = 0;
  for (const auto& c : r.cpus) {
    auto it = c.busy.find(w);
    const SimDuration b = it == c.busy.end() ? 0 : it->second;
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  return ratio(static_cast<double>(hi), static_cast<double>(lo));
}

ScenarioConfig two_group_share(const std::string& a, std::int64_t wa, const std::string& b, std::int64_t wb) {
  ScenarioConfig cfg;
  cfg.name = "share_" + a + "_" + b;
  cfg.cpus = 1;
  cfg.engine.duration = sec(12);
  cfg.engine.warmup = sec(2);
  cfg.cgroups = {{a, std::nullopt, wa, 0}, {b, std::nullopt, wb, 0}};
  WorkloadSpec w;
  w.kind = WorkloadKind::Bound;
  cfg.tasks = {{"loop_a", 1, a, w, std::nullopt, 0}, {"loop_b", 1, b, w, std::nullopt, 0}};
  validate(cfg);
  return cfg;
}

}  // namespace

std::vector<std::string> property_failures(std::uint64_t seed) {
  std::vector<std::string> fails;
  auto note = [&](const std::string& where, const std::vector<Violation>& v) {
    if (!v.empty()) fails.push_back(where + ": " + std::to_string(v.size()) + " violation(s), first: " + v.front().what);
  };

  for (const std::string name : {"min_max", "fifty_fifty", "mixed_weights", "oversub_24"}) {
    ScenarioConfig cfg = with_policy(preset(name), PolicyKind::Ufs);
    cfg.engine.rng_seed = seed;
    cfg.engine.duration = sec(10);
    cfg.engine.warmup = sec(1);
    Engine engine(cfg);
    const RunResult run = engine.run();
    const auto& checks = dynamic_cast<UfsPolicy&>(engine.policy()).checks();
    if (checks.argmin_violations || checks.clamp_violations || checks.monotonicity_violations ||
        checks.stash_violations)
      fails.push_back(name + ": in-policy invariant counters non-zero");
    note(name + " work conservation", check_work_conservation(run.trace, cfg));
    note(name + " tier precedence", check_tier_precedence(run.trace, cfg));
    note(name + " time closure", check_time_closure(run.trace, cfg));
    const MetricsReport report = compute_metrics(run.trace, cfg);
    note(name + " percentiles", check_percentiles(report));

    if (name == "min_max") {
      const RunResult again = Engine(cfg).run();
      if (again.trace.to_csv() != run.trace.to_csv()) fails.push_back("min_max: traces differ for equal seed");
    }
  }

  for (auto policy : {PolicyKind::Eevdf, PolicyKind::Rr, PolicyKind::Fifo}) {
    ScenarioConfig cfg = with_policy(preset("min_max"), policy);
    cfg.engine.duration = sec(5);
    cfg.engine.warmup = sec(1);
    const RunResult run = simulate(cfg);
    note(std::string(to_string(policy)) + " time closure", check_time_closure(run.trace, cfg));
  }

  struct Share {
    std::string a, b;
    std::int64_t wa, wb;
  };
  for (const Share& s : {Share{"bg_two", "bg_three", 2, 3}, Share{"ts_lo", "ts_hi", 6667, 10000}}) {
    const MetricsReport r = run_report(two_group_share(s.a, s.wa, s.b, s.wb));
    const double got = ratio(static_cast<double>(r.cgroups.at(s.a).cpu_time),
                             static_cast<double>(r.cgroups.at(s.b).cpu_time));
    const double want = static_cast<double>(s.wa) / static_cast<double>(s.wb);
    if (std::abs(got - want) > 0.05 * want)
      fails.push_back(fmt("share %.0f:%.0f gave %.4f, expected %.4f +-5%%", static_cast<double>(s.wa),
                          static_cast<double>(s.wb), got, want));
  }

  ScenarioConfig solo = preset("solo_bound");
  solo.engine.duration = sec(3);
  solo.engine.warmup = 0;
  ScenarioConfig other = solo;
  other.engine.rng_seed = seed + 17;
  if (simulate(solo).trace.to_csv() != simulate(other).trace.to_csv())
    fails.push_back("solo_bound: deterministic workload depends on the seed");
  return fails;
}

std::vector<CriterionResult> evaluate_acceptance(std::uint64_t seed,
                                                 const std::function<void(const std::string&)>& progress) {
  Runner run(seed, progress);
  std::vector<CriterionResult> out;
  auto add = [&](int id, const std::string& name, bool pass, const std::string& detail) {
    out.push_back({id, name, pass, detail});
  };

  {
    std::vector<double> t;
    for (auto p : {PolicyKind::Ufs, PolicyKind::Eevdf, PolicyKind::Rr, PolicyKind::Fifo})
      t.push_back(thr(run.get("solo_bursty", p), "bursty"));
    const double lo = *std::min_element(t.begin(), t.end());
    const double hi = *std::max_element(t.begin(), t.end());
    add(1, "SOLO parity", hi <= 1.05 * lo,
        fmt("bursty req/s ufs=%.1f eevdf=%.1f rr=%.1f fifo=%.1f", t[0], t[1], t[2], t[3]) +
            fmt(" spread=%.4f (limit 1.05)", ratio(hi, lo)));
  }
  {
    const double u = thr(run.get("min_max", PolicyKind::Ufs), "bursty");
    const double e = thr(run.get("min_max", PolicyKind::Eevdf), "bursty");
    const double solo = thr(run.get("solo_bursty", PolicyKind::Ufs), "bursty");
    add(2, "MIN:MAX protection", u >= 1.8 * e && u >= 0.9 * solo,
        fmt("ufs/eevdf=%.3f (>=1.8) ufs/solo=%.3f (>=0.9)", ratio(u, e), ratio(u, solo)));
  }
  {
    const double e = util_skew(run.get("min_max", PolicyKind::Eevdf), "bursty");
    const double u = util_skew(run.get("min_max", PolicyKind::Ufs), "bursty");
    add(3, "MIN:MAX placement skew", e >= 2.0 && u <= 1.1,
        fmt("per-CPU bursty max/min eevdf=%.3f (>=2) ufs=%.3f (<=1.1)", e, u));
  }
  {
    const double ub = ratio(thr(run.get("fifty_fifty", PolicyKind::Ufs), "bursty"),
                            thr(run.get("solo_bursty", PolicyKind::Ufs), "bursty"));
    const double ud = ratio(thr(run.get("fifty_fifty", PolicyKind::Ufs), "bound"),
                            thr(run.get("solo_bound", PolicyKind::Ufs), "bound"));
    const double fb = ratio(thr(run.get("fifty_fifty", PolicyKind::Fifo), "bursty"),
                            thr(run.get("solo_bursty", PolicyKind::Fifo), "bursty"));
    const double rb = ratio(thr(run.get("fifty_fifty", PolicyKind::Rr), "bursty"),
                            thr(run.get("solo_bursty", PolicyKind::Rr), "bursty"));
    add(4, "50:50 balance", ub >= 0.70 && ud >= 0.45 && fb <= 0.10 && rb <= 0.20,
        fmt("of SOLO: ufs bursty=%.3f (>=0.70) ufs bound=%.3f (>=0.45) fifo bursty=%.3f (<=0.10)", ub, ud, fb) +
            fmt(" rr bursty=%.3f (<=0.20)", rb));
  }
  {
    const double u = p95(run.get("min_max", PolicyKind::Ufs), "bursty");
    const double e = p95(run.get("min_max", PolicyKind::Eevdf), "bursty");
    const double r = p95(run.get("min_max", PolicyKind::Rr), "bursty");
    const double u50 = p95(run.get("fifty_fifty", PolicyKind::Ufs), "bursty");
    const double r50 = p95(run.get("fifty_fifty", PolicyKind::Rr), "bursty");
    add(5, "Latency ordering", e >= 1.8 * u && r >= 1.3 * u && r50 >= 10 * u50,
        fmt("p95 min_max eevdf/ufs=%.3f (>=1.8) rr/ufs=%.3f (>=1.3); fifty_fifty rr/ufs=%.3f (>=10)",
            ratio(e, u), ratio(r, u), ratio(r50, u50)));
  }
  {
    const double u = thr(run.get("oversub_24", PolicyKind::Ufs), "bursty");
    const double r = thr(run.get("oversub_24", PolicyKind::Rr), "bursty");
    add(6, "Oversubscription", u >= r, fmt("oversub_24 bursty ufs/rr=%.4f (>=1.0)", ratio(u, r)));
  }
  {
    const auto& u = run.get("mixed_weights", PolicyKind::Ufs);
    const auto& e = run.get("mixed_weights", PolicyKind::Eevdf);
    const double ts = ratio(thr(u, "bursty_lo"), thr(u, "bursty_hi"));
    const double bg = ratio(thr(u, "bound_lo"), thr(u, "bound_hi"));
    const double ets = ratio(thr(e, "bursty_lo"), thr(e, "bursty_hi"));
    auto in = [](double x, double lo, double hi) { return x >= lo && x <= hi; };
    add(7, "Mixed weights", in(ts, 0.57, 0.77) && in(bg, 0.57, 0.77) && in(ets, 0.85, 1.15),
        fmt("ufs ts=%.3f bg=%.3f (in [0.57,0.77]); eevdf ts=%.3f (in [0.85,1.15])", ts, bg, ets));
  }
  {
    const double t0 = latency(run.get("lock_inversion_baseline", PolicyKind::Ufs), "waiter");
    const auto& u = run.get("lock_inversion", PolicyKind::Ufs);
    const auto& e = run.get("lock_inversion", PolicyKind::Eevdf);
    const auto& f = run.get("lock_inversion", PolicyKind::Fifo);
    const auto& r = run.get("lock_inversion", PolicyKind::Rr);
    const double uw = latency(u, "waiter");
    const bool e_ok = e.panics == 1 && e.panic_failures == 1000;
    const double fw = latency(f, "waiter");
    const bool f_ok = fw < 0 || fw > 10 * t0;
    const double rh = latency(r, "holder");
    const bool pass = t0 > 0 && uw >= 1.7 * t0 && uw <= 2.5 * t0 && e_ok && f_ok && rh >= 15 * t0 && rh <= 25 * t0;
    add(8, "Priority inversion", pass,
        fmt("T0=%.3fs ufs waiter=%.3f T0 (in [1.7,2.5]) rr holder=%.3f T0 (in [15,25])", t0 / 1e9, ratio(uw, t0),
            ratio(rh, t0)) +
            fmt("; eevdf panic failures=%.0f (==1000); fifo waiter ",
                e.panic_failures ? static_cast<double>(*e.panic_failures) : -1.0) +
            (fw < 0 ? std::string("never acquired") : fmt("acquired after %.3f T0 (>10)", ratio(fw, t0))));
  }
  {
    const auto& on = run.get("min_max", PolicyKind::Ufs, true);
    const auto& off = run.get("min_max", PolicyKind::Ufs, false);
    const double a = thr(on, "bursty");
    const double b = thr(off, "bursty");
    const double delta = std::abs(a - b) / b;
    add(9, "Hinting overhead", delta <= 0.01 && on.boosts == 0,
        fmt("bursty throughput delta=%.5f (<=0.01) boosts=%.0f (==0)", delta, static_cast<double>(on.boosts)));
  }
  {
    if (progress) progress("property suites");
    const auto fails = property_failures(seed);
    std::string detail = fails.empty() ? "all property checks hold" : fails.front();
    if (fails.size() > 1) detail += " (+" + std::to_string(fails.size() - 1) + " more)";
    add(10, "Property suites", fails.empty(), detail);
  }
  return out;
}

}  // namespace ufsim
