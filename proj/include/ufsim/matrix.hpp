#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ufsim/metrics.hpp"
#include "ufsim/scenario.hpp"

namespace ufsim {

struct MatrixCell {
  std::string preset;
  PolicyKind policy = PolicyKind::Ufs;
  std::uint64_t seed = 1;
  std::optional<MetricsReport> report;
  std::string error;  // set when the cell could not run
};

struct MatrixOptions {
  std::vector<std::string> presets;
  std::vector<PolicyKind> policies;
  std::vector<std::uint64_t> seeds = {1};
  std::optional<SimDuration> duration;
  std::string out_dir;  // per-cell reports are written here when non-empty
  unsigned jobs = 0;    // 0: one per hardware thread
};

struct MatrixResult {
  std::vector<MatrixCell> cells;
  const MatrixCell* find(const std::string& preset, PolicyKind policy, std::uint64_t seed = 1) const;
  /// One row per cell and workload; throughput is also given relative to the
  /// solo preset of the same workload kind under the same policy and seed.
  std::string summary_csv() const;
};

/// Runs every preset x policy x seed cell. A failing cell records its error and
/// the rest still run.
MatrixResult run_matrix(const MatrixOptions& opts);

/// Runs `cfg` and computes its report.
MetricsReport run_report(const ScenarioConfig& cfg);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Evaluates the repository's ten acceptance criteria. `progress` (optional) is
/// told about each simulation as it starts.
std::vector<CriterionResult> evaluate_acceptance(std::uint64_t seed = 1,
                                                 const std::function<void(const std::string&)>& progress = {});

/// Criterion 10 on its own: invariant and property checks on small scenarios.
std::vector<std::string> property_failures(std::uint64_t seed = 1);

}  // namespace ufsim
