// lowgain: PLE diagnostics, scenario runs and reproduction presets.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lowgain/campaign.hpp"
#include "lowgain/output.hpp"
#include "lowgain/paper.hpp"
#include "lowgain/scenario.hpp"

namespace {

using namespace lowgain;
using nlohmann::json;

json to_json(const linalg::Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

struct PairSource {
  std::optional<double> example1Alpha;
  std::string config;

  std::pair<linalg::Matrix, linalg::Matrix> load() const {
    if (example1Alpha) {
      linalg::Matrix a(2, 2);
      a << 0, 1, 0, *example1Alpha;
      linalg::Matrix b(2, 1);
      b << 0, 1;
      return {a, b};
    }
    if (!config.empty()) {
      const model::Plant plant = cli::load_scenario(config).plant();
      return {plant.a(), plant.b()};
    }
    const model::Plant plant = cli::paper_plant();
    return {plant.a(), plant.b()};
  }
};

void add_pair_options(CLI::App* cmd, PairSource& src) {
  cmd->add_option("--example1", src.example1Alpha,
                  "use A = [[0,1],[0,alpha]], B = [0,1]^T with this alpha");
  cmd->add_option("--config", src.config, "take (A, B) from a scenario file");
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

int exit_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::NotControllable:
    case ErrorKind::HypothesisViolated:
    case ErrorKind::NotHurwitz:
    case ErrorKind::NotObservable:
    case ErrorKind::InvalidDelayProfile:
      return cli::kAssumptionFailure;
    default:
      return cli::kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-gain feedback for linear plants with time-varying input delays"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir;
  bool plot = false;
  std::optional<double> step;
  std::optional<double> horizon;
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--plot", plot, "also write SVG plots of |x(t)|");
  app.add_option("--step", step, "integration step");
  app.add_option("--horizon", horizon, "simulation horizon");

  auto* ple_cmd = app.add_subcommand("ple", "parametric Lyapunov equation tools");
  ple_cmd->require_subcommand(1);
  PairSource solve_src, check_src, dc_src;
  double solve_gamma = 1.0;
  double check_gamma = 1.0;
  int per_decade = 8;
  bool allow_distinct = false;
  auto* solve_cmd = ple_cmd->add_subcommand("solve", "P(gamma), W(gamma), dP/dgamma");
  add_pair_options(solve_cmd, solve_src);
  solve_cmd->add_option("--gamma", solve_gamma, "gamma")->required();
  auto* check_cmd = ple_cmd->add_subcommand("check", "property margins and constants");
  add_pair_options(check_cmd, check_src);
  check_cmd->add_option("--gamma", check_gamma, "gamma")->required();
  auto* dc_cmd = ple_cmd->add_subcommand("delta-c", "estimate delta_c on a log grid");
  add_pair_options(dc_cmd, dc_src);
  dc_cmd->add_option("--points-per-decade", per_decade, "grid density");
  dc_cmd->add_flag("--allow-distinct", allow_distinct,
                   "evaluate even when the eigenvalues of A differ");

  auto* run_cmd = app.add_subcommand("run", "simulate a scenario file");
  std::string run_config;
  run_cmd->add_option("config", run_config, "scenario JSON")->required();

  auto* repro_cmd = app.add_subcommand("repro", "reproduce a benchmark variant");
  std::string variant_name;
  repro_cmd->add_option("variant", variant_name,
                        "gamma0Sweep | muSweep | omegaSweep | best | observer")
      ->required();

  auto* gain_cmd = app.add_subcommand("verify-gain", "compare B^T P with the printed gain");
  std::vector<double> gain_samples{0.25, 0.5, 1.0, 2.0};
  gain_cmd->add_option("--gamma", gain_samples, "gamma samples");

  auto* camp_cmd = app.add_subcommand("campaign", "randomized property campaign");
  std::uint64_t seed = 42;
  int count = 50;
  int n_max = 6;
  bool single_block = false;
  camp_cmd->add_option("--seed", seed, "RNG seed");
  camp_cmd->add_option("--count", count, "number of random pairs");
  camp_cmd->add_option("--nmax", n_max, "largest state dimension");
  camp_cmd->add_flag("--single-block", single_block, "one Jordan block per pair");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) {
      const auto [a, b] = solve_src.load();
      const ple::Solution sol = ple::solve_ple(a, b, solve_gamma);
      print_json({{"gamma", sol.gamma},
                  {"P", to_json(sol.P)},
                  {"W", to_json(sol.W)},
                  {"dPdGamma", to_json(sol.dPdGamma)},
                  {"residual", sol.residual},
                  {"conditionEstimate", sol.conditionEstimate},
                  {"illConditioned", sol.illConditioned}});
      if (sol.illConditioned) std::cerr << "warning: W(gamma) is ill-conditioned\n";
      return 0;
    }
    if (check_cmd->parsed()) {
      const auto [a, b] = check_src.load();
      const ple::Diagnostics d = ple::diagnose(ple::Solver(a, b), check_gamma);
      json margins = json::array();
      for (const auto& m : d.propertyMargins) {
        margins.push_back({{"name", m.name},
                           {"value", m.value},
                           {"scale", m.scale},
                           {"holds", m.holds()}});
      }
      auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
      print_json({{"gamma", d.gamma},
                  {"deltaC", finite_or_null(d.deltaC)},
                  {"deltaCBounded", d.deltaCBounded},
                  {"mu1", finite_or_null(d.mu1)},
                  {"mu2", finite_or_null(d.mu2)},
                  {"delta", d.delta},
                  {"alphaA", d.alphaA},
                  {"piGamma", d.pi(d.gamma)},
                  {"margins", margins},
                  {"allHold", d.all_hold()}});
      return d.all_hold() ? 0 : 1;
    }
    if (dc_cmd->parsed()) {
      const auto [a, b] = dc_src.load();
      const ple::Solver solver(a, b);
      ple::DeltaCOptions opts;
      opts.requireIdenticalEigenvalues = !allow_distinct;
      const ple::DeltaCEstimate est =
          ple::estimate_delta_c(solver, ple::default_delta_c_grid(solver, per_decade), opts);
      const char* edge = est.edge == ple::GridEdge::Interior ? "interior"
                         : est.edge == ple::GridEdge::Lower  ? "lower"
                                                             : "upper";
      print_json({{"deltaC", est.value},
                  {"argmaxGamma", est.argmaxGamma},
                  {"bounded", est.bounded},
                  {"edge", edge},
                  {"gridPoints", est.grid.size()}});
      return 0;
    }
    if (run_cmd->parsed()) {
      cli::ScenarioConfig cfg = cli::load_scenario(run_config);
      if (step) cfg.step = *step;
      if (horizon) cfg.tEnd = *horizon;
      const std::string stem = std::filesystem::path(run_config).stem().string();
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        cfg.csvPath = (std::filesystem::path(out_dir) / (stem + ".csv")).string();
        if (plot) cfg.plotPath = (std::filesystem::path(out_dir) / (stem + ".svg")).string();
      } else if (plot && !cfg.plotPath) {
        cfg.plotPath = stem + ".svg";
      }
      const cli::RunReport report = cli::run_scenario(cfg);
      std::cout << report.message << "\n";
      if (report.diagnostics) {
        const auto& d = *report.diagnostics;
        std::printf("gamma0 %.6g  deltaC %.6g  mu1 %.6g  mu2 %.6g  delta %d  margins %s\n",
                    d.gamma, d.deltaC, d.mu1, d.mu2, d.delta, d.all_hold() ? "hold" : "FAIL");
      }
      if (report.trajectory) {
        const auto& tr = *report.trajectory;
        const auto m = sim::settling_metrics(tr, 0.01);
        std::printf("samples %zu  peak |x| %.6g  final |x| %.6g  settling(1%%) %s\n", tr.size(),
                    m.peak, tr.normX.back(),
                    m.settlingTime ? std::to_string(*m.settlingTime).c_str() : "never");
        for (const auto& w : tr.warnings) std::cerr << "warning: " << w << "\n";
        if (cfg.csvPath) std::cout << "wrote " << *cfg.csvPath << "\n";
      }
      return report.exitCode;
    }
    if (repro_cmd->parsed()) {
      const auto variant = cli::parse_variant(variant_name);
      if (!variant) {
        std::cerr << "unknown variant '" << variant_name << "'\n";
        return cli::kFailure;
      }
      cli::ReproOptions opts;
      if (step) opts.step = *step;
      opts.horizon = horizon;
      if (!out_dir.empty()) opts.outDir = out_dir;
      opts.plot = plot;
      const cli::ReproResult result = cli::repro_paper(*variant, opts);
      std::cout << result.summary;
      return 0;
    }
    if (gain_cmd->parsed()) {
      const cli::GainCheck check = cli::verify_gain_formula(gain_samples);
      for (std::size_t i = 0; i < check.gammas.size(); ++i) {
        std::printf("gamma %-8g k0 %-14.8g deviation %.3g\n", check.gammas[i],
                    cli::printed_gain_denominator(check.gammas[i]), check.deviations[i]);
      }
      std::printf("max deviation %.3g\n", check.maxDeviation);
      return check.maxDeviation <= 1e-6 ? 0 : 1;
    }
    if (camp_cmd->parsed()) {
      cli::CampaignOptions opts;
      opts.singleBlockOnly = single_block;
      const cli::CampaignReport report = cli::property_campaign(seed, count, n_max, opts);
      std::cout << report.summary();
      return report.pass ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kFailure;
  }
  return 0;
}
