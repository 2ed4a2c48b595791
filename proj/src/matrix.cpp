#include "ufsim/matrix.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "ufsim/engine.hpp"

namespace ufsim {

MetricsReport run_report(const ScenarioConfig& cfg) {
  const RunResult r = simulate(cfg);
  return compute_metrics(r.trace, cfg);
}

const MatrixCell* MatrixResult::find(const std::string& preset, PolicyKind policy, std::uint64_t seed) const {
  for (const auto& c : cells)
    if (c.preset == preset && c.policy == policy && c.seed == seed) return &c;
  return nullptr;
}

namespace {

void write_atomically(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string solo_for(const std::string& workload) {
  if (workload.rfind("bursty", 0) == 0) return "solo_bursty";
  if (workload.rfind("bound", 0) == 0) return "solo_bound";
  return "";
}

}  // namespace

MatrixResult run_matrix(const MatrixOptions& opts) {
  MatrixResult result;
  for (const auto& p : opts.presets)
    for (auto pol : opts.policies)
      for (auto seed : opts.seeds) result.cells.push_back({p, pol, seed, std::nullopt, ""});

  if (!opts.out_dir.empty()) std::filesystem::create_directories(opts.out_dir);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < result.cells.size(); i = next++) {
      MatrixCell& cell = result.cells[i];
      try {
        ScenarioConfig cfg = with_policy(preset(cell.preset), cell.policy);
        cfg.engine.rng_seed = cell.seed;
        if (opts.duration) cfg.engine.duration = *opts.duration;
        if (cfg.engine.warmup >= cfg.engine.duration) cfg.engine.warmup = 0;
        cell.report = run_report(cfg);
        if (!opts.out_dir.empty()) {
          const std::string stem =
              cell.preset + "__" + std::string(to_string(cell.policy)) + "__" + std::to_string(cell.seed);
          write_atomically(std::filesystem::path(opts.out_dir) / (stem + ".json"), cell.report->to_json());
        }
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  unsigned jobs = opts.jobs ? opts.jobs : std::max(1U, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, result.cells.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (!opts.out_dir.empty())
    write_atomically(std::filesystem::path(opts.out_dir) / "summary.csv", result.summary_csv());
  return result;
}

std::string MatrixResult::summary_csv() const {
  std::ostringstream os;
  os << "preset,policy,seed,workload,completed,throughput_per_s,normalized_to_solo,mean_latency_ms,p95_ms,p99_9_ms,error\n";
  auto ms = [](const std::optional<double>& ns) {
    if (!ns) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *ns / 1e6);
    return std::string(buf);
  };
  auto ms_int = [&](const std::optional<SimDuration>& ns) {
    return ns ? ms(static_cast<double>(*ns)) : std::string();
  };
  for (const auto& c : cells) {
    const std::string head = c.preset + "," + std::string(to_string(c.policy)) + "," + std::to_string(c.seed);
    if (!c.report) {
      std::string err = c.error;
      for (auto& ch : err)
        if (ch == ',' || ch == '\n') ch = ';';
      os << head << ",,,,,,,," << err << '\n';
      continue;
    }
    for (const auto& [name, g] : c.report->workloads) {
      std::string norm;
      const std::string solo = solo_for(name);
      if (const MatrixCell* s = solo.empty() ? nullptr : find(solo, c.policy, c.seed); s && s->report) {
        auto it = s->report->workloads.find(solo == "solo_bursty" ? "bursty" : "bound");
        if (it != s->report->workloads.end() && it->second.throughput > 0) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.4f", g.throughput / it->second.throughput);
          norm = buf;
        }
      }
      char thr[32];
      std::snprintf(thr, sizeof thr, "%.3f", g.throughput);
      os << head << ',' << name << ',' << g.completed << ',' << thr << ',' << norm << ','
         << ms(g.mean_latency) << ',' << ms_int(g.p95) << ',' << ms_int(g.p999) << ",\n";
    }
  }
  return os.str();
}

}  // namespace ufsim
