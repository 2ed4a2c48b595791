#include "ufsim/scenario.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ufsim {

using nlohmann::json;

std::string_view to_string(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::Bursty: return "bursty";
    case WorkloadKind::Bound: return "bound";
    case WorkloadKind::LockHolder: return "lock_holder";
    case WorkloadKind::LockWaiter: return "lock_waiter";
  }
  return "?";
}

std::string_view to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::Ufs: return "ufs";
    case PolicyKind::Eevdf: return "eevdf";
    case PolicyKind::Idle: return "idle";
    case PolicyKind::Fifo: return "fifo";
    case PolicyKind::Rr: return "rr";
  }
  return "?";
}

PolicyKind policy_from_string(std::string_view s) {
  for (auto p : {PolicyKind::Ufs, PolicyKind::Eevdf, PolicyKind::Idle, PolicyKind::Fifo,
                 PolicyKind::Rr})
    if (to_string(p) == s) return p;
  throw ConfigError("unknown policy '" + std::string(s) + "' (expected ufs|eevdf|idle|fifo|rr)");
}

int ScenarioConfig::task_count() const {
  int n = 0;
  for (const auto& t : tasks) n += t.count;
  return n;
}

std::string format_duration(SimDuration d) {
  if (d != 0 && d % sec(1) == 0) return std::to_string(d / sec(1)) + "s";
  if (d != 0 && d % ms(1) == 0) return std::to_string(d / ms(1)) + "ms";
  if (d != 0 && d % us(1) == 0) return std::to_string(d / us(1)) + "us";
  return std::to_string(d) + "ns";
}

SimDuration parse_duration(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
  if (i == 0) throw ConfigError("bad duration '" + std::string(s) + "'");
  std::uint64_t v = 0;
  std::from_chars(s.data(), s.data() + i, v);
  const std::string_view unit = s.substr(i);
  if (unit == "ns" || unit.empty()) return v;
  if (unit == "us") return us(v);
  if (unit == "ms") return ms(v);
  if (unit == "s") return sec(v);
  throw ConfigError("bad duration unit in '" + std::string(s) + "' (expected ns|us|ms|s)");
}

namespace {

// SAX handler that builds the DOM and remembers the source line of every value,
// keyed by JSON pointer, so semantic errors can point at the offending line.
class LineTrackingBuilder {
 public:
  using number_integer_t = json::number_integer_t;
  using number_unsigned_t = json::number_unsigned_t;
  using number_float_t = json::number_float_t;
  using string_t = json::string_t;
  using binary_t = json::binary_t;

  explicit LineTrackingBuilder(const int* line) : line_(line) {}

  json result;
  std::map<std::string, int> lines;

  bool null() { return put(nullptr); }
  bool boolean(bool v) { return put(v); }
  bool number_integer(number_integer_t v) { return put(v); }
  bool number_unsigned(number_unsigned_t v) { return put(v); }
  bool number_float(number_float_t v, const string_t&) { return put(v); }
  bool string(string_t& v) { return put(v); }
  bool binary(binary_t&) { return false; }
  bool start_object(std::size_t) { return open(json::object()); }
  bool end_object() { return close(); }
  bool start_array(std::size_t) { return open(json::array()); }
  bool end_array() { return close(); }
  bool key(string_t& k) {
    key_ = k;
    lines[pointer_for_next()] = *line_;
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) {
    throw ConfigError(std::string("malformed JSON: ") + ex.what(), *line_);
  }

 private:
  std::string pointer_for_next() const {
    if (stack_.empty()) return "";
    const json& top = *stack_.back().node;
    if (top.is_object()) return stack_.back().path + "/" + key_;
    return stack_.back().path + "/" + std::to_string(top.size());
  }

  json* insert(json v) {
    if (stack_.empty()) {
      result = std::move(v);
      return &result;
    }
    json& top = *stack_.back().node;
    if (top.is_object()) return &(top[key_] = std::move(v));
    const std::string p = pointer_for_next();
    if (!lines.count(p)) lines[p] = *line_;
    top.push_back(std::move(v));
    return &top.back();
  }

  bool put(json v) {
    insert(std::move(v));
    return true;
  }
  bool open(json v) {
    const std::string p = pointer_for_next();
    json* node = insert(std::move(v));
    stack_.push_back({node, p});
    return true;
  }
  bool close() {
    stack_.pop_back();
    return true;
  }

  struct Frame {
    json* node;
    std::string path;
  };
  const int* line_;
  std::vector<Frame> stack_;
  std::string key_;
};

class CountingIter {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  CountingIter(const char* p, int* line) : p_(p), line_(line) {}
  reference operator*() const { return *p_; }
  CountingIter& operator++() {
    if (*p_ == '\n') ++*line_;
    ++p_;
    return *this;
  }
  CountingIter operator++(int) {
    auto t = *this;
    ++*this;
    return t;
  }
  friend bool operator==(const CountingIter& a, const CountingIter& b) { return a.p_ == b.p_; }
  friend bool operator!=(const CountingIter& a, const CountingIter& b) { return a.p_ != b.p_; }

 private:
  const char* p_;
  int* line_;
};

// Typed accessors over the parsed document that reject unknown keys and
// report the line of whatever they complain about.
class Reader {
 public:
  Reader(const json& j, const std::map<std::string, int>& lines, std::string path)
      : j_(j), lines_(lines), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& msg, const std::string& sub = "") const {
    throw ConfigError(msg, line(sub));
  }

  int line(const std::string& sub = "") const {
    std::string p = sub.empty() ? path_ : path_ + "/" + sub;
    while (true) {
      auto it = lines_.find(p);
      if (it != lines_.end()) return it->second;
      auto slash = p.rfind('/');
      if (slash == std::string::npos || p.empty()) return 0;
      p = p.substr(0, slash);
    }
  }

  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) fail(where() + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key())) fail("unknown field '" + it.key() + "' in " + where(), it.key());
  }

  bool has(const char* k) const { return j_.contains(k) && !j_.at(k).is_null(); }
  Reader child(const std::string& k) const { return Reader(j_.at(k), lines_, path_ + "/" + k); }
  Reader at(std::size_t i) const { return Reader(j_.at(i), lines_, path_ + "/" + std::to_string(i)); }
  std::size_t size() const { return j_.size(); }
  const json& raw() const { return j_; }

  std::string str(const char* k) const {
    if (!j_.at(k).is_string()) fail("field '" + std::string(k) + "' must be a string", k);
    return j_.at(k).get<std::string>();
  }
  std::int64_t integer(const char* k) const {
    if (!j_.at(k).is_number_integer()) fail("field '" + std::string(k) + "' must be an integer", k);
    return j_.at(k).get<std::int64_t>();
  }
  double number(const char* k) const {
    if (!j_.at(k).is_number()) fail("field '" + std::string(k) + "' must be a number", k);
    return j_.at(k).get<double>();
  }
  bool boolean(const char* k) const {
    if (!j_.at(k).is_boolean()) fail("field '" + std::string(k) + "' must be a boolean", k);
    return j_.at(k).get<bool>();
  }
  SimDuration duration(const char* k) const {
    const json& v = j_.at(k);
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0))
      return v.get<std::uint64_t>();
    if (v.is_string()) {
      try {
        return parse_duration(v.get<std::string>());
      } catch (const ConfigError& e) {
        fail(e.what(), k);
      }
    }
    fail("field '" + std::string(k) + "' must be a duration (\"4ms\" or nanoseconds)", k);
  }
  std::string where() const { return path_.empty() ? "scenario" : "'" + path_ + "'"; }

 private:
  const json& j_;
  const std::map<std::string, int>& lines_;
  std::string path_;
};

Distribution read_distribution(const Reader& r) {
  r.expect_object({"dist", "mean", "value", "lo", "hi"});
  const std::string kind = r.has("dist") ? r.str("dist") : "exponential";
  Distribution d;
  if (kind == "exponential") {
    if (!r.has("mean")) r.fail("exponential distribution needs 'mean'");
    d = Distribution::exponential(r.duration("mean"));
    if (d.mean == 0) r.fail("distribution mean must be > 0", "mean");
  } else if (kind == "constant") {
    if (!r.has("value")) r.fail("constant distribution needs 'value'");
    d = Distribution::constant(r.duration("value"));
  } else if (kind == "uniform") {
    if (!r.has("lo") || !r.has("hi")) r.fail("uniform distribution needs 'lo' and 'hi'");
    d = Distribution::uniform(r.duration("lo"), r.duration("hi"));
    if (d.hi < d.lo) r.fail("uniform distribution has hi < lo", "hi");
    if (d.hi == 0) r.fail("distribution mean must be > 0", "hi");
  } else {
    r.fail("unknown distribution '" + kind + "'", "dist");
  }
  return d;
}

WorkloadSpec read_workload(const Reader& r) {
  r.expect_object({"kind", "service", "think", "iteration_work", "label", "lock",
                   "spin_attempts_before_sleep", "spin_cost", "sleep_initial", "sleep_cap",
                   "panic_threshold", "holder_work"});
  WorkloadSpec w;
  if (!r.has("kind")) r.fail("workload needs 'kind'");
  const std::string kind = r.str("kind");
  if (kind == "bursty") w.kind = WorkloadKind::Bursty;
  else if (kind == "bound") w.kind = WorkloadKind::Bound;
  else if (kind == "lock_holder") w.kind = WorkloadKind::LockHolder;
  else if (kind == "lock_waiter") w.kind = WorkloadKind::LockWaiter;
  else r.fail("unknown workload kind '" + kind + "'", "kind");

  if (r.has("service")) w.bursty.service = read_distribution(r.child("service"));
  if (r.has("think")) w.bursty.think = read_distribution(r.child("think"));
  if (r.has("iteration_work")) {
    w.bound.iteration_work = r.duration("iteration_work");
    if (w.bound.iteration_work == 0) r.fail("iteration_work must be > 0", "iteration_work");
  }
  if (r.has("label")) w.bound.label = r.str("label");
  if (r.has("lock")) w.lock_id = static_cast<LockId>(r.integer("lock"));
  if (r.has("spin_attempts_before_sleep"))
    w.lock.spin_attempts_before_sleep = static_cast<int>(r.integer("spin_attempts_before_sleep"));
  if (r.has("spin_cost")) w.lock.spin_cost = r.duration("spin_cost");
  if (r.has("sleep_initial")) w.lock.sleep_initial = r.duration("sleep_initial");
  if (r.has("sleep_cap")) w.lock.sleep_cap = r.duration("sleep_cap");
  if (r.has("panic_threshold")) {
    w.lock.panic_threshold = static_cast<int>(r.integer("panic_threshold"));
    if (w.lock.panic_threshold < 1) r.fail("panic_threshold must be >= 1", "panic_threshold");
  }
  if (r.has("holder_work")) w.lock.holder_work = r.duration("holder_work");
  return w;
}

json distribution_json(const Distribution& d) {
  switch (d.kind) {
    case Distribution::Kind::Exponential:
      return {{"dist", "exponential"}, {"mean", format_duration(d.mean)}};
    case Distribution::Kind::Constant:
      return {{"dist", "constant"}, {"value", format_duration(d.mean)}};
    case Distribution::Kind::Uniform:
      return {{"dist", "uniform"}, {"lo", format_duration(d.lo)}, {"hi", format_duration(d.hi)}};
  }
  return {};
}

json workload_json(const WorkloadSpec& w) {
  json j;
  j["kind"] = std::string(to_string(w.kind));
  switch (w.kind) {
    case WorkloadKind::Bursty:
      j["service"] = distribution_json(w.bursty.service);
      j["think"] = distribution_json(w.bursty.think);
      break;
    case WorkloadKind::Bound:
      j["iteration_work"] = format_duration(w.bound.iteration_work);
      j["label"] = w.bound.label;
      break;
    case WorkloadKind::LockHolder:
    case WorkloadKind::LockWaiter:
      j["lock"] = w.lock_id;
      j["spin_attempts_before_sleep"] = w.lock.spin_attempts_before_sleep;
      j["spin_cost"] = format_duration(w.lock.spin_cost);
      j["sleep_initial"] = format_duration(w.lock.sleep_initial);
      j["sleep_cap"] = format_duration(w.lock.sleep_cap);
      j["panic_threshold"] = w.lock.panic_threshold;
      j["holder_work"] = format_duration(w.lock.holder_work);
      break;
  }
  return j;
}

void validate_impl(const ScenarioConfig& cfg, const Reader* r) {
  auto fail = [&](const std::string& msg, const std::string& path) {
    if (r) r->fail(msg, path);
    throw ConfigError(msg);
  };
  if (cfg.cpus < 1 || cfg.cpus > 64) fail("cpus must be within [1, 64]", "cpus");
  if (cfg.engine.slice == 0) fail("slice must be > 0", "engine/slice");
  if (cfg.engine.warmup >= cfg.engine.duration)
    fail("warmup must be shorter than duration", "engine/warmup");
  if (cfg.policy_params.dispatch_retries < 1)
    fail("dispatch_retries must be >= 1", "policy_params/dispatch_retries");
  if (cfg.policy_params.rr_quantum == 0) fail("rr_quantum must be > 0", "policy_params/rr_quantum");
  if (cfg.policy_params.fair_server_share < 0 || cfg.policy_params.fair_server_share >= 1)
    fail("fair_server_share must be within [0, 1)", "policy_params/fair_server_share");

  CgroupTree tree;
  for (std::size_t i = 0; i < cfg.cgroups.size(); ++i) {
    const auto& g = cfg.cgroups[i];
    const std::string base = "cgroups/" + std::to_string(i);
    try {
      tree.add(g.name, g.parent, Weight(g.weight), g.rt_priority);
    } catch (const std::invalid_argument& e) {
      fail(std::string("cgroup '") + g.name + "': " + e.what(), base + "/weight");
    } catch (const ConfigError& e) {
      fail(e.what(), base + "/name");
    }
    if (g.rt_priority < 0 || g.rt_priority > 99)
      fail("rt_priority must be within [0, 99]", base + "/rt_priority");
  }

  std::set<LockId> holders;
  bool has_background = false;
  for (std::size_t i = 0; i < cfg.tasks.size(); ++i) {
    const auto& t = cfg.tasks[i];
    const std::string base = "tasks/" + std::to_string(i);
    if (t.count < 1) fail("task count must be >= 1", base + "/count");
    auto g = tree.find(t.cgroup);
    if (!g) fail("task '" + t.name + "' references unknown cgroup '" + t.cgroup + "'", base + "/cgroup");
    if (!tree.is_leaf(*g)) fail("tasks must belong to a leaf cgroup", base + "/cgroup");
    if (tree.at(*g).tier == Tier::Background) has_background = true;
    if (t.affinity) {
      if (t.affinity->empty()) fail("affinity must not be empty", base + "/affinity");
      for (CpuId c : *t.affinity)
        if (c < 0 || c >= cfg.cpus)
          fail("affinity CPU " + std::to_string(c) + " is not online", base + "/affinity");
    }
    if (t.workload.kind == WorkloadKind::LockHolder && !holders.insert(t.workload.lock_id).second)
      fail("at most one holder per lock", base + "/workload/lock");
  }
  if (cfg.policy == PolicyKind::Idle && !has_background)
    fail("policy 'idle' needs a background (low-priority) workload", "policy");

  for (std::size_t i = 0; i < cfg.events.size(); ++i) {
    const auto& e = cfg.events[i];
    const std::string base = "events/" + std::to_string(i);
    if (e.task < 0 || e.task >= cfg.task_count()) fail("event task id out of range", base + "/task");
    auto g = tree.find(e.cgroup);
    if (!g) fail("event references unknown cgroup '" + e.cgroup + "'", base + "/cgroup");
    if (!tree.is_leaf(*g)) fail("tasks must belong to a leaf cgroup", base + "/cgroup");
    if (e.at >= cfg.engine.duration) fail("event lies beyond the run duration", base + "/at");
  }
}

}  // namespace

void validate(const ScenarioConfig& cfg) { validate_impl(cfg, nullptr); }

ScenarioConfig parse_scenario(std::string_view text) {
  int line = 1;
  LineTrackingBuilder builder(&line);
  CountingIter first(text.data(), &line);
  CountingIter last(text.data() + text.size(), &line);
  json::sax_parse(first, last, &builder);

  const Reader root(builder.result, builder.lines, "");
  root.expect_object({"name", "cpus", "policy", "hinting", "engine", "policy_params", "cgroups",
                      "tasks", "events", "outputs"});
  ScenarioConfig cfg;
  if (root.has("name")) cfg.name = root.str("name");
  if (!root.has("cpus")) root.fail("missing required field 'cpus'");
  cfg.cpus = static_cast<int>(root.integer("cpus"));
  if (root.has("policy")) {
    try {
      cfg.policy = policy_from_string(root.str("policy"));
    } catch (const ConfigError& e) {
      root.fail(e.what(), "policy");
    }
  }
  if (root.has("hinting")) cfg.hinting = root.boolean("hinting");

  if (root.has("engine")) {
    const Reader e = root.child("engine");
    e.expect_object({"slice", "ctx_switch_cost", "migration_cost", "seed", "duration", "warmup"});
    if (e.has("slice")) cfg.engine.slice = e.duration("slice");
    if (e.has("ctx_switch_cost")) cfg.engine.ctx_switch_cost = e.duration("ctx_switch_cost");
    if (e.has("migration_cost")) cfg.engine.migration_cost = e.duration("migration_cost");
    if (e.has("seed")) {
      if (!e.raw().at("seed").is_number_integer()) e.fail("seed must be an integer", "seed");
      cfg.engine.rng_seed = e.raw().at("seed").get<std::uint64_t>();
    }
    if (e.has("duration")) cfg.engine.duration = e.duration("duration");
    if (e.has("warmup")) cfg.engine.warmup = e.duration("warmup");
  }
  if (root.has("policy_params")) {
    const Reader p = root.child("policy_params");
    p.expect_object({"rr_quantum", "balance_interval", "fair_server_share", "fair_server_period",
                     "fair_server_grant", "dispatch_retries", "rt_priority"});
    auto& pp = cfg.policy_params;
    if (p.has("rr_quantum")) pp.rr_quantum = p.duration("rr_quantum");
    if (p.has("balance_interval")) pp.balance_interval = p.duration("balance_interval");
    if (p.has("fair_server_share")) pp.fair_server_share = p.number("fair_server_share");
    if (p.has("fair_server_period")) pp.fair_server_period = p.duration("fair_server_period");
    if (p.has("fair_server_grant")) pp.fair_server_grant = p.duration("fair_server_grant");
    if (p.has("dispatch_retries")) pp.dispatch_retries = static_cast<int>(p.integer("dispatch_retries"));
    if (p.has("rt_priority")) pp.rt_priority = static_cast<int>(p.integer("rt_priority"));
  }
  if (!root.has("cgroups")) root.fail("missing required field 'cgroups'");
  {
    const Reader gs = root.child("cgroups");
    if (!gs.raw().is_array()) gs.fail("'cgroups' must be an array");
    for (std::size_t i = 0; i < gs.size(); ++i) {
      const Reader g = gs.at(i);
      g.expect_object({"name", "parent", "weight", "rt_priority"});
      CgroupSpec spec;
      if (!g.has("name")) g.fail("cgroup needs 'name'");
      spec.name = g.str("name");
      if (g.has("parent")) spec.parent = g.str("parent");
      if (g.has("weight")) spec.weight = g.integer("weight");
      if (g.has("rt_priority")) spec.rt_priority = static_cast<int>(g.integer("rt_priority"));
      cfg.cgroups.push_back(std::move(spec));
    }
  }
  if (!root.has("tasks")) root.fail("missing required field 'tasks'");
  {
    const Reader ts = root.child("tasks");
    if (!ts.raw().is_array()) ts.fail("'tasks' must be an array");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const Reader t = ts.at(i);
      t.expect_object({"name", "count", "cgroup", "workload", "affinity", "start"});
      TaskSpec spec;
      spec.name = t.has("name") ? t.str("name") : "task" + std::to_string(i);
      if (t.has("count")) spec.count = static_cast<int>(t.integer("count"));
      if (!t.has("cgroup")) t.fail("task needs 'cgroup'");
      spec.cgroup = t.str("cgroup");
      if (!t.has("workload")) t.fail("task needs 'workload'");
      spec.workload = read_workload(t.child("workload"));
      if (t.has("affinity")) {
        const Reader a = t.child("affinity");
        if (!a.raw().is_array()) a.fail("'affinity' must be an array of CPU ids");
        std::vector<CpuId> cpus;
        for (const auto& c : a.raw()) {
          if (!c.is_number_integer()) a.fail("'affinity' must be an array of CPU ids");
          cpus.push_back(c.get<CpuId>());
        }
        spec.affinity = std::move(cpus);
      }
      if (t.has("start")) spec.start = t.duration("start");
      cfg.tasks.push_back(std::move(spec));
    }
  }
  if (root.has("events")) {
    const Reader es = root.child("events");
    if (!es.raw().is_array()) es.fail("'events' must be an array");
    for (std::size_t i = 0; i < es.size(); ++i) {
      const Reader e = es.at(i);
      e.expect_object({"at", "kind", "task", "cgroup"});
      if (!e.has("kind") || e.str("kind") != "reassign")
        e.fail("only 'reassign' events are supported", "kind");
      if (!e.has("at") || !e.has("task") || !e.has("cgroup"))
        e.fail("reassign event needs 'at', 'task' and 'cgroup'");
      cfg.events.push_back({e.duration("at"), static_cast<TaskId>(e.integer("task")), e.str("cgroup")});
    }
  }
  if (root.has("outputs")) {
    const Reader o = root.child("outputs");
    o.expect_object({"report", "trace"});
    if (o.has("report")) cfg.report_path = o.str("report");
    if (o.has("trace")) cfg.trace_path = o.str("trace");
  }
  validate_impl(cfg, &root);
  return cfg;
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["cpus"] = cfg.cpus;
  j["policy"] = std::string(to_string(cfg.policy));
  j["hinting"] = cfg.hinting;
  j["engine"] = {{"slice", format_duration(cfg.engine.slice)},
                 {"ctx_switch_cost", format_duration(cfg.engine.ctx_switch_cost)},
                 {"migration_cost", format_duration(cfg.engine.migration_cost)},
                 {"seed", cfg.engine.rng_seed},
                 {"duration", format_duration(cfg.engine.duration)},
                 {"warmup", format_duration(cfg.engine.warmup)}};
  const auto& pp = cfg.policy_params;
  j["policy_params"] = {{"rr_quantum", format_duration(pp.rr_quantum)},
                        {"balance_interval", format_duration(pp.balance_interval)},
                        {"fair_server_share", pp.fair_server_share},
                        {"fair_server_period", format_duration(pp.fair_server_period)},
                        {"fair_server_grant", format_duration(pp.fair_server_grant)},
                        {"dispatch_retries", pp.dispatch_retries},
                        {"rt_priority", pp.rt_priority}};
  j["cgroups"] = json::array();
  for (const auto& g : cfg.cgroups) {
    json gj = {{"name", g.name}, {"weight", g.weight}};
    if (g.parent) gj["parent"] = *g.parent;
    if (g.rt_priority) gj["rt_priority"] = g.rt_priority;
    j["cgroups"].push_back(std::move(gj));
  }
  j["tasks"] = json::array();
  for (const auto& t : cfg.tasks) {
    json tj = {{"name", t.name}, {"count", t.count}, {"cgroup", t.cgroup},
               {"workload", workload_json(t.workload)}};
    if (t.affinity) tj["affinity"] = *t.affinity;
    if (t.start) tj["start"] = format_duration(t.start);
    j["tasks"].push_back(std::move(tj));
  }
  if (!cfg.events.empty()) {
    j["events"] = json::array();
    for (const auto& e : cfg.events)
      j["events"].push_back({{"at", format_duration(e.at)}, {"kind", "reassign"},
                             {"task", e.task}, {"cgroup", e.cgroup}});
  }
  if (cfg.report_path || cfg.trace_path) {
    json o = json::object();
    if (cfg.report_path) o["report"] = *cfg.report_path;
    if (cfg.trace_path) o["trace"] = *cfg.trace_path;
    j["outputs"] = o;
  }
  return j.dump(2) + "\n";
}

ScenarioConfig load_scenario(const std::string& path_or_preset) {
  if (is_preset(path_or_preset)) return preset(path_or_preset);
  std::ifstream in(path_or_preset);
  if (!in) throw ConfigError("cannot open scenario '" + path_or_preset + "' (not a preset or readable file)");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace ufsim
