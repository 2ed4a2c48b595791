#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ufsim/engine.hpp"
#include "ufsim/matrix.hpp"
#include "ufsim/scenario.hpp"

namespace py = pybind11;
using namespace ufsim;

namespace {

py::object parse_json(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

// A preset name, a path to a JSON file, or inline JSON text.
ScenarioConfig resolve(const std::string& scenario) {
  const auto first = scenario.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && scenario[first] == '{') return parse_scenario(scenario);
  return load_scenario(scenario);
}

ScenarioConfig configure(const std::string& scenario, const std::optional<std::string>& policy,
                         std::optional<std::uint64_t> seed, const std::optional<std::string>& duration,
                         const std::optional<std::string>& warmup, std::optional<bool> hinting) {
  ScenarioConfig cfg = resolve(scenario);
  if (seed) cfg.engine.rng_seed = *seed;
  if (duration) cfg.engine.duration = parse_duration(*duration);
  if (warmup) cfg.engine.warmup = parse_duration(*warmup);
  if (hinting) cfg.hinting = *hinting;
  const PolicyKind kind = policy ? policy_from_string(*policy) : cfg.policy;
  return with_policy(std::move(cfg), kind);
}

}  // namespace

PYBIND11_MODULE(ufsim, m) {
  m.doc() = "Deterministic CPU-scheduling simulator";
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);

  m.def("presets", &preset_names, "Names of the built-in scenarios.");
  m.def(
      "scenario_json",
      [](const std::string& scenario, const std::optional<std::string>& policy) {
        ScenarioConfig cfg = resolve(scenario);
        if (policy) cfg = with_policy(std::move(cfg), policy_from_string(*policy));
        return parse_json(scenario_to_json(cfg));
      },
      py::arg("scenario"), py::arg("policy") = py::none(),
      "Scenario as a dict. Accepts a preset name, a file path or JSON text.");
  m.def(
      "validate", [](const std::string& scenario) { validate(resolve(scenario)); }, py::arg("scenario"),
      "Raises ConfigError if the scenario is invalid.");

  m.def(
      "run",
      [](const std::string& scenario, const std::optional<std::string>& policy, std::optional<std::uint64_t> seed,
         const std::optional<std::string>& duration, const std::optional<std::string>& warmup,
         std::optional<bool> hinting) {
        const ScenarioConfig cfg = configure(scenario, policy, seed, duration, warmup, hinting);
        std::string report;
        {
          py::gil_scoped_release release;
          report = run_report(cfg).to_json();
        }
        return parse_json(report);
      },
      py::arg("scenario"), py::arg("policy") = py::none(), py::arg("seed") = py::none(),
      py::arg("duration") = py::none(), py::arg("warmup") = py::none(), py::arg("hinting") = py::none(),
      "Runs one scenario and returns its metrics report as a dict.");

  m.def(
      "trace",
      [](const std::string& scenario, const std::optional<std::string>& policy, std::optional<std::uint64_t> seed,
         const std::optional<std::string>& duration, const std::optional<std::string>& warmup,
         std::optional<bool> hinting) {
        const ScenarioConfig cfg = configure(scenario, policy, seed, duration, warmup, hinting);
        py::gil_scoped_release release;
        return simulate(cfg).trace.to_csv();
      },
      py::arg("scenario"), py::arg("policy") = py::none(), py::arg("seed") = py::none(),
      py::arg("duration") = py::none(), py::arg("warmup") = py::none(), py::arg("hinting") = py::none(),
      "Runs one scenario and returns its event trace as CSV text.");

  m.def(
      "acceptance",
      [](std::uint64_t seed) {
        std::vector<CriterionResult> results;
        {
          py::gil_scoped_release release;
          results = evaluate_acceptance(seed);
        }
        py::list out;
        for (const auto& r : results)
          out.append(py::dict(py::arg("id") = r.id, py::arg("name") = r.name, py::arg("pass") = r.pass,
                              py::arg("detail") = r.detail));
        return out;
      },
      py::arg("seed") = 1, "Evaluates the ten acceptance criteria.");

  m.def(
      "property_failures",
      [](std::uint64_t seed) {
        py::gil_scoped_release release;
        return property_failures(seed);
      },
      py::arg("seed") = 1, "Invariant and property check failures; empty when all hold.");
}
