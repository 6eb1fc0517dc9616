#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lowgain/scenario.hpp"

// The two-delay 4x4 benchmark plant and its reproduction presets.
namespace lowgain::cli {

[[nodiscard]] model::Plant paper_plant();
/// tau_1 = 1 + 0.4 sin 2t, tau_2 = 0.3 + 0.3 sin 3t, tau_bar = 1.4, d = 0.9.
[[nodiscard]] model::DelayProfile paper_delays();
[[nodiscard]] Vector paper_x0();
[[nodiscard]] Vector paper_xi0();
[[nodiscard]] Matrix paper_observer_gain();

/// Scenario for the benchmark plant with the given schedule.
[[nodiscard]] ScenarioConfig paper_scenario(const schedule::GainSchedule& schedule, double horizon,
                                            double step = 1e-3);
[[nodiscard]] ScenarioConfig paper_observer_scenario(double horizon = 300.0, double step = 1e-3);

/// Closed-form K(gamma) (u = -K x) printed for the benchmark plant.
[[nodiscard]] Matrix printed_gain(double gamma);
/// k0(gamma) of the printed formula.
[[nodiscard]] double printed_gain_denominator(double gamma);

struct GainCheck {
  std::vector<double> gammas;
  /// max_ij |B^T P - K_printed| / max_ij |K_printed| per sample.
  std::vector<double> deviations;
  double maxDeviation = 0.0;
};

[[nodiscard]] GainCheck verify_gain_formula(const std::vector<double>& gammas);

enum class ReproVariant { Gamma0Sweep, MuSweep, OmegaSweep, Best, Observer };

[[nodiscard]] std::optional<ReproVariant> parse_variant(const std::string& name);
[[nodiscard]] std::string_view to_string(ReproVariant v);

struct ReproOptions {
  double step = 1e-3;
  /// 100 s for state feedback and 300 s for the observer when empty.
  std::optional<double> horizon;
  /// Directory for CSVs (and plots); nothing is written when empty.
  std::optional<std::string> outDir;
  bool plot = false;
  int recordStride = 10;
};

struct ReproRun {
  std::string label;
  schedule::GainSchedule schedule;
  sim::Trajectory trajectory;
  sim::SettlingMetrics state;
  /// Observer runs only.
  std::optional<sim::SettlingMetrics> error;
};

struct ReproResult {
  ReproVariant variant = ReproVariant::Best;
  std::vector<ReproRun> runs;
  /// Labels sorted by settling time (runs that never settle last).
  std::vector<std::string> settlingOrder;
  std::string summary;
};

/// Settling metrics use fraction 0.01. Runs execute in parallel workers.
[[nodiscard]] ReproResult repro_paper(ReproVariant variant, const ReproOptions& options = {});

}  // namespace lowgain::cli
