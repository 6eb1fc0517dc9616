#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lowgain/control.hpp"
#include "lowgain/model.hpp"
#include "lowgain/schedule.hpp"
#include "lowgain/sim.hpp"

// Scenario documents (JSON). Matrices are nested row-major arrays.
//
// {
//   "plant":    {"A": [[..]], "B": [[[..]], ...], "C": [[..]]},
//   "delays":   {"tau_bar": 1.4, "d": 0.9,
//                "channels": [{"kind": "sinusoid", "offset": 1, "amplitude": 0.4, "frequency": 2},
//                             {"kind": "constant", "value": 0.7},
//                             {"kind": "table", "points": [[t, tau], ...]}]},
//   "mode":     {"kind": "time_varying" | "constant_gamma" | "baseline" | "observer" | "open_loop",
//                "gamma": 0.1, "L": [[..]]},
//   "schedule": {"gamma0": 2, "omega": 1, "mu": 0.5},
//   "sim":      {"step": 1e-3, "t_end": 100, "x0": [..], "xi0": [..], "u0": [..],
//                "record_stride": 10, "k3": 1,
//                "vanishing_delay_policy": {"kind": "predictor_corrector", "iterations": 2}},
//   "output":   {"csv": "run.csv", "plot": "run.svg"},
//   "rng_seed": 0
// }
namespace lowgain::cli {

using linalg::Matrix;
using linalg::Vector;

enum class ModeKind { TimeVarying, ConstantGamma, Baseline, Observer, OpenLoop };

struct ScenarioConfig {
  Matrix A;
  std::vector<Matrix> B;
  Matrix C;

  double tauBar = 1.0;
  double d = 0.0;
  std::vector<model::DelayChannel> channels;

  ModeKind mode = ModeKind::TimeVarying;
  double gamma = 0.0;
  Matrix L;

  schedule::GainSchedule schedule;

  double step = 1e-3;
  double tEnd = 10.0;
  Vector x0;
  Vector xi0;
  /// Constant input history on [-2 tau_bar, 0); zero when empty.
  Vector u0;
  int recordStride = 10;
  sim::VanishingDelayPolicy policy;
  double k3 = 1.0;

  std::optional<std::string> csvPath;
  std::optional<std::string> plotPath;
  std::uint64_t rngSeed = 0;

  [[nodiscard]] model::Plant plant() const;
  [[nodiscard]] model::DelayProfile profile() const;
  /// Baseline resolves to ConstantGammaState with 0.9 * gamma_star_bound.
  [[nodiscard]] control::ControllerMode controller_mode() const;
  [[nodiscard]] sim::SimConfig sim_config() const;
};

/// Throws ConfigParse with the offending key on malformed input or
/// inconsistent dimensions.
[[nodiscard]] ScenarioConfig parse_scenario(const std::string& text);
[[nodiscard]] ScenarioConfig load_scenario(const std::string& path);
[[nodiscard]] std::string serialize_scenario(const ScenarioConfig& config);

[[nodiscard]] std::string_view to_string(ModeKind kind);

enum ExitCode : int { kOk = 0, kFailure = 1, kAssumptionFailure = 2, kNonFiniteState = 3 };

struct RunReport {
  int exitCode = kOk;
  std::string message;
  std::optional<ple::Diagnostics> diagnostics;
  std::optional<sim::Trajectory> trajectory;
};

/// Assumption checks, PLE diagnostics at the initial gain, integration and
/// monitors; writes the CSV (and plot) named in the config.
[[nodiscard]] RunReport run_scenario(const ScenarioConfig& config);

}  // namespace lowgain::cli
