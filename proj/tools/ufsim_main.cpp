// ufsim command-line driver.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "ufsim/engine.hpp"
#include "ufsim/matrix.hpp"
#include "ufsim/metrics.hpp"
#include "ufsim/verify.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitSimulation = 2;
constexpr int kExitCheck = 3;

using namespace ufsim;

struct Overrides {
  std::string policy;
  std::string duration;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool no_hinting = false;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--policy", o.policy, "ufs, eevdf, idle, fifo or rr");
  cmd->add_option("--duration", o.duration, "simulated duration, e.g. 10s or 500ms");
  cmd->add_option("--seed", o.seed, "random seed")->each([&](const std::string&) { o.seed_set = true; });
  cmd->add_flag("--no-hinting", o.no_hinting, "disable lock-holder hints");
}

ScenarioConfig apply(ScenarioConfig cfg, const Overrides& o) {
  if (o.seed_set) cfg.engine.rng_seed = o.seed;
  if (o.no_hinting) cfg.hinting = false;
  if (!o.duration.empty()) {
    cfg.engine.duration = parse_duration(o.duration);
    if (cfg.engine.warmup >= cfg.engine.duration) cfg.engine.warmup = 0;
  }
  const PolicyKind policy = o.policy.empty() ? cfg.policy : policy_from_string(o.policy);
  return with_policy(std::move(cfg), policy);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event CPU scheduling simulator"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_path;
  std::string trace_path;
  bool check = false;
  Overrides ov;

  auto* run = app.add_subcommand("run", "simulate one scenario and print its report");
  run->add_option("--scenario", scenario, "preset name or JSON file")->required();
  run->add_option("--out", out_path, "write the JSON report here instead of stdout");
  run->add_option("--trace", trace_path, "write the event trace CSV here");
  run->add_flag("--check", check, "also run the invariant checks; exit 3 on a violation");
  add_overrides(run, ov);

  std::string presets_arg;
  std::string policies_arg = "ufs,eevdf,idle,fifo,rr";
  std::string seeds_arg = "1";
  unsigned jobs = 0;
  auto* matrix = app.add_subcommand("matrix", "run presets x policies x seeds and write summary.csv");
  matrix->add_option("--presets", presets_arg, "comma-separated preset names (default: all)");
  matrix->add_option("--policies", policies_arg, "comma-separated policies");
  matrix->add_option("--seeds", seeds_arg, "comma-separated seeds");
  matrix->add_option("--duration", ov.duration, "override every preset's duration");
  matrix->add_option("--out", out_path, "output directory")->required();
  matrix->add_option("--jobs", jobs, "worker threads (default: hardware threads)");
  matrix->add_flag("--check", check, "evaluate the acceptance criteria; exit 3 if any fail");

  auto* exp = app.add_subcommand("export-preset", "print a preset as scenario JSON");
  exp->add_option("name", scenario, "preset name")->required();
  exp->add_option("--policy", ov.policy, "apply this policy before exporting");

  auto* val = app.add_subcommand("validate", "parse and validate a scenario");
  val->add_option("--scenario", scenario, "preset name or JSON file")->required();

  auto* replay = app.add_subcommand("replay", "recompute a report from a saved trace");
  replay->add_option("--scenario", scenario, "scenario the trace came from")->required();
  replay->add_option("--trace", trace_path, "trace CSV")->required();
  replay->add_option("--out", out_path, "write the JSON report here instead of stdout");
  add_overrides(replay, ov);

  app.add_subcommand("list-presets", "print the built-in preset names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      ScenarioConfig cfg = apply(load_scenario(scenario), ov);
      if (trace_path.empty() && cfg.trace_path) trace_path = *cfg.trace_path;
      if (out_path.empty() && cfg.report_path) out_path = *cfg.report_path;
      const RunResult result = simulate(cfg);
      const MetricsReport report = compute_metrics(result.trace, cfg);
      if (!trace_path.empty()) write_file(trace_path, result.trace.to_csv());
      if (out_path.empty())
        std::cout << report.to_json() << '\n';
      else
        write_file(out_path, report.to_json());
      if (check) {
        std::vector<Violation> all;
        for (auto&& v : {check_time_closure(result.trace, cfg), check_percentiles(report)})
          all.insert(all.end(), v.begin(), v.end());
        if (cfg.policy == PolicyKind::Ufs)
          for (auto&& v : {check_work_conservation(result.trace, cfg), check_tier_precedence(result.trace, cfg)})
            all.insert(all.end(), v.begin(), v.end());
        for (const auto& v : all) std::cerr << "violation at " << v.time << " ns: " << v.what << '\n';
        if (!all.empty()) return kExitCheck;
      }
      return 0;
    }
    if (matrix->parsed()) {
      MatrixOptions opts;
      opts.presets = presets_arg.empty() ? preset_names() : split(presets_arg);
      for (const auto& p : split(policies_arg)) opts.policies.push_back(policy_from_string(p));
      opts.seeds.clear();
      for (const auto& s : split(seeds_arg)) opts.seeds.push_back(std::stoull(s));
      if (opts.seeds.empty()) throw ConfigError("--seeds is empty");
      if (!ov.duration.empty()) opts.duration = parse_duration(ov.duration);
      opts.out_dir = out_path;
      opts.jobs = jobs;
      const MatrixResult result = run_matrix(opts);
      int failed_cells = 0;
      for (const auto& c : result.cells)
        if (!c.report) {
          std::cerr << c.preset << '/' << to_string(c.policy) << '/' << c.seed << ": " << c.error << '\n';
          ++failed_cells;
        }
      std::cout << "wrote " << result.cells.size() << " cells to " << out_path << '\n';
      if (check) {
        bool ok = true;
        for (const auto& r : evaluate_acceptance(opts.seeds.front())) {
          std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << " (" << r.name << "): " << r.detail
                    << '\n';
          ok = ok && r.pass;
        }
        if (!ok) return kExitCheck;
      }
      return failed_cells ? kExitSimulation : 0;
    }
    if (exp->parsed()) {
      ScenarioConfig cfg = preset(scenario);
      if (!ov.policy.empty()) cfg = with_policy(cfg, policy_from_string(ov.policy));
      std::cout << scenario_to_json(cfg) << '\n';
      return 0;
    }
    if (val->parsed()) {
      const ScenarioConfig cfg = load_scenario(scenario);
      std::cout << cfg.name << ": ok (" << cfg.cpus << " CPUs, " << cfg.task_count() << " tasks, policy "
                << to_string(cfg.policy) << ")\n";
      return 0;
    }
    if (replay->parsed()) {
      const ScenarioConfig cfg = apply(load_scenario(scenario), ov);
      std::ifstream in(trace_path, std::ios::binary);
      if (!in) throw ConfigError("cannot open trace " + trace_path);
      const MetricsReport report = compute_metrics(Trace::read_csv(in), cfg);
      if (out_path.empty())
        std::cout << report.to_json() << '\n';
      else
        write_file(out_path, report.to_json());
      return 0;
    }
    for (const auto& n : preset_names()) std::cout << n << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SimulationError& e) {
    std::cerr << "simulation error: " << e.what() << '\n';
    return kExitSimulation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSimulation;
  }
}
