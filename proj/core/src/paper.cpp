#include "lowgain/paper.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <limits>
#include <sstream>

#include "lowgain/output.hpp"

namespace lowgain::cli {

namespace {

double poly(std::initializer_list<double> coeffs, double g) {
  // Highest degree first.
  double acc = 0.0;
  for (double c : coeffs) acc = acc * g + c;
  return acc;
}

struct VariantRun {
  std::string label;
  schedule::GainSchedule schedule;
};

std::vector<VariantRun> variant_runs(ReproVariant v) {
  switch (v) {
    case ReproVariant::Gamma0Sweep:
      return {{"gamma0=0.5", {0.5, 1.0, 0.5}},
              {"gamma0=1", {1.0, 1.0, 0.5}},
              {"gamma0=2", {2.0, 1.0, 0.5}},
              {"gamma0=3", {3.0, 1.0, 0.5}}};
    case ReproVariant::MuSweep:
      return {{"mu=3/8", {2.0, 1.0, 0.375}},
              {"mu=1/2", {2.0, 1.0, 0.5}},
              {"mu=5/8", {2.0, 1.0, 0.625}},
              {"mu=3/4", {2.0, 1.0, 0.75}}};
    case ReproVariant::OmegaSweep:
      return {{"omega=0.8", {2.0, 0.8, 0.5}},
              {"omega=1", {2.0, 1.0, 0.5}},
              {"omega=1.2", {2.0, 1.2, 0.5}},
              {"omega=1.5", {2.0, 1.5, 0.5}}};
    case ReproVariant::Best: return {{"best", {2.0, 1.2, 0.5}}};
    case ReproVariant::Observer: return {{"observer", {1.0, 1.0, 0.95}}};
  }
  return {};
}

std::string format_time(const std::optional<double>& t) {
  if (!t) return "never";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *t);
  return buf;
}

}  // namespace

model::Plant paper_plant() {
  Matrix a(4, 4);
  a << 0, 1, 2, -1,
       0, 0, -4, 2,
       1, 1, 2, -1,
       2, 2, 4, -2;
  Matrix b1(4, 2);
  b1 << 0, 0,
        -1, 1,
        0, 0,
        0, -1;
  Matrix b2(4, 2);
  b2 << 0, 0,
        2, -2,
        0, 0,
        0, 2;
  Matrix c(2, 4);
  c << 0, 0, 1, 0,
       1, 0, 0, 0;
  return model::Plant(a, {b1, b2}, c);
}

model::DelayProfile paper_delays() {
  return model::DelayProfile(
      {model::SinusoidDelay{1.0, 0.4, 2.0}, model::SinusoidDelay{0.3, 0.3, 3.0}}, 1.4, 0.9);
}

Vector paper_x0() {
  Vector x(4);
  x << 1, 2, -2, -6;
  return x;
}

Vector paper_xi0() {
  Vector x(4);
  x << -1, 1, 1, -1;
  return x;
}

Matrix paper_observer_gain() {
  Matrix l(4, 2);
  l << 1.5, 1.5,
       1.75, 1.75,
       2.5, 1.5,
       5.25, 3.25;
  return l;
}

ScenarioConfig paper_scenario(const schedule::GainSchedule& sched, double horizon, double step) {
  const model::Plant plant = paper_plant();
  const model::DelayProfile delays = paper_delays();
  ScenarioConfig cfg;
  cfg.A = plant.a();
  cfg.B = plant.bs();
  cfg.C = plant.c();
  cfg.tauBar = delays.tau_bar();
  cfg.d = delays.d();
  cfg.channels = delays.channels();
  cfg.mode = ModeKind::TimeVarying;
  cfg.schedule = sched;
  cfg.step = step;
  cfg.tEnd = horizon;
  cfg.x0 = paper_x0();
  cfg.u0 = Vector::Zero(plant.m());
  return cfg;
}

ScenarioConfig paper_observer_scenario(double horizon, double step) {
  ScenarioConfig cfg = paper_scenario({1.0, 1.0, 0.95}, horizon, step);
  cfg.mode = ModeKind::Observer;
  cfg.L = paper_observer_gain();
  cfg.xi0 = paper_xi0();
  return cfg;
}

double printed_gain_denominator(double g) { return poly({25, 80, 148, 128, 96, 0, 64}, g); }

Matrix printed_gain(double g) {
  const double g2 = g * g;
  const double g3 = g2 * g;
  const double g4 = g3 * g;
  const double k11 = g4 * poly({-5, 3, 24, 100, 160, 176}, g);
  const double k12 = g3 * poly({35, 144, 312, 352, 224}, g);
  const double k13 = g2 * poly({-5, -12, -2, 164, 512, 848, 704, 384}, g);
  const double k14 = g2 * poly({15, 106, 280, 424, 352, 192}, g);
  const double k21 = 2 * g3 * poly({5, -3, -20, -44, 4, 0, 64}, g);
  const double k22 = 2 * g2 * poly({-10, -19, -16, 36, 64, 96}, g);
  const double k23 = 2 * g * poly({5, 12, 61, 138, 248, 216, 288, 192, 256}, g);
  const double k24 = g * poly({45, 138, 248, 232, 288, 192, 256}, g);
  Matrix k(2, 4);
  k << k11, k12, -k13, k14,
       k21, k22, -k23, k24;
  return k / printed_gain_denominator(g);
}

GainCheck verify_gain_formula(const std::vector<double>& gammas) {
  const model::Plant plant = paper_plant();
  const ple::Solver solver(plant.a(), plant.b());
  GainCheck check;
  for (double g : gammas) {
    if (!(g > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma samples must be positive");
    const Matrix k = plant.b().transpose() * solver.solve(g).P;
    const Matrix printed = printed_gain(g);
    const double dev = (k - printed).cwiseAbs().maxCoeff() / printed.cwiseAbs().maxCoeff();
    check.gammas.push_back(g);
    check.deviations.push_back(dev);
    check.maxDeviation = std::max(check.maxDeviation, dev);
  }
  return check;
}

std::optional<ReproVariant> parse_variant(const std::string& name) {
  for (auto v : {ReproVariant::Gamma0Sweep, ReproVariant::MuSweep, ReproVariant::OmegaSweep,
                 ReproVariant::Best, ReproVariant::Observer}) {
    if (name == to_string(v)) return v;
  }
  return std::nullopt;
}

std::string_view to_string(ReproVariant v) {
  switch (v) {
    case ReproVariant::Gamma0Sweep: return "gamma0Sweep";
    case ReproVariant::MuSweep: return "muSweep";
    case ReproVariant::OmegaSweep: return "omegaSweep";
    case ReproVariant::Best: return "best";
    case ReproVariant::Observer: return "observer";
  }
  return "unknown";
}

ReproResult repro_paper(ReproVariant variant, const ReproOptions& options) {
  const bool observer = variant == ReproVariant::Observer;
  const double horizon = options.horizon.value_or(observer ? 300.0 : 100.0);
  if (options.outDir) std::filesystem::create_directories(*options.outDir);

  ReproResult result;
  result.variant = variant;
  std::vector<std::future<ReproRun>> jobs;
  for (const VariantRun& vr : variant_runs(variant)) {
    jobs.push_back(std::async(std::launch::async, [vr, observer, horizon, &options] {
      ScenarioConfig cfg = observer ? paper_observer_scenario(horizon, options.step)
                                    : paper_scenario(vr.schedule, horizon, options.step);
      cfg.recordStride = options.recordStride;
      ReproRun run;
      run.label = vr.label;
      run.schedule = vr.schedule;
      run.trajectory = sim::integrate_closed_loop(cfg.plant(), cfg.profile(),
                                                  cfg.controller_mode(), cfg.sim_config());
      run.state = sim::settling_metrics(run.trajectory, 0.01);
      if (observer) {
        run.error = sim::settling_metrics(run.trajectory.times, run.trajectory.normE, 0.01);
      }
      return run;
    }));
  }
  for (auto& job : jobs) result.runs.push_back(job.get());

  std::vector<const ReproRun*> order;
  for (const auto& r : result.runs) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const ReproRun* a, const ReproRun* b) {
    const double ta = a->state.settlingTime.value_or(std::numeric_limits<double>::infinity());
    const double tb = b->state.settlingTime.value_or(std::numeric_limits<double>::infinity());
    return ta < tb;
  });
  for (const ReproRun* r : order) result.settlingOrder.push_back(r->label);

  std::ostringstream table;
  table << "variant " << to_string(variant) << ", step " << options.step << ", horizon "
        << horizon << "\n";
  table << "label         gamma0  omega   mu      peak |x|     settle(1%)  final |x|\n";
  for (const auto& r : result.runs) {
    char line[200];
    std::snprintf(line, sizeof line, "%-13s %-7.4g %-7.4g %-7.4g %-12.5g %-11s %.4g\n",
                  r.label.c_str(), r.schedule.gamma0, r.schedule.omega, r.schedule.mu,
                  r.state.peak, format_time(r.state.settlingTime).c_str(),
                  r.trajectory.normX.back());
    table << line;
    if (r.error) {
      std::snprintf(line, sizeof line, "%-13s %-23s %-12.5g %-11s %.4g\n", "  |e|", "",
                    r.error->peak, format_time(r.error->settlingTime).c_str(),
                    r.trajectory.normE.back());
      table << line;
    }
  }
  table << "settling order:";
  for (const auto& l : result.settlingOrder) table << ' ' << l;
  table << "\n";
  result.summary = table.str();

  if (options.outDir) {
    const std::filesystem::path dir(*options.outDir);
    std::vector<PlotSeries> series;
    for (const auto& r : result.runs) {
      std::string stem = std::string(to_string(variant)) + "_" + r.label;
      std::replace(stem.begin(), stem.end(), '/', '_');
      std::replace(stem.begin(), stem.end(), '=', '_');
      write_trajectory_csv(r.trajectory, (dir / (stem + ".csv")).string());
      series.push_back({r.label, r.trajectory.times, r.trajectory.normX});
      if (r.error) series.push_back({r.label + " |e|", r.trajectory.times, r.trajectory.normE});
    }
    write_text_file((dir / (std::string(to_string(variant)) + "_summary.txt")).string(),
                    result.summary);
    if (options.plot) {
      write_norm_plot_svg(series, std::string(to_string(variant)),
                          (dir / (std::string(to_string(variant)) + ".svg")).string());
    }
  }
  return result;
}

}  // namespace lowgain::cli
