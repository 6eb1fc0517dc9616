#include "lowgain/scenario.hpp"

#include <cmath>

#include <json.hpp>

#include "lowgain/output.hpp"

namespace lowgain::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw Error(ErrorKind::ConfigParse, key + ": " + what);
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) fail(path + "." + key, "missing");
  return obj.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

double number_or(const json& obj, const std::string& key, double fallback,
                 const std::string& path) {
  if (!obj.contains(key)) return fallback;
  return number(obj.at(key), path + "." + key);
}

Vector vector_of(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty numeric array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Matrix matrix_of(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) fail(path + "[0]", "expected a nonempty numeric row");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) fail(row_path, "rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          number(j[r][c], row_path + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

json to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

model::DelayChannel channel_of(const json& j, const std::string& path) {
  const json& kind = field(j, "kind", path);
  if (!kind.is_string()) fail(path + ".kind", "expected a string");
  const auto k = kind.get<std::string>();
  if (k == "constant") return model::ConstantDelay{number(field(j, "value", path), path + ".value")};
  if (k == "sinusoid") {
    return model::SinusoidDelay{number(field(j, "offset", path), path + ".offset"),
                                number(field(j, "amplitude", path), path + ".amplitude"),
                                number(field(j, "frequency", path), path + ".frequency")};
  }
  if (k == "table") {
    const Matrix pts = matrix_of(field(j, "points", path), path + ".points");
    if (pts.cols() != 2) fail(path + ".points", "expected [t, tau] pairs");
    model::TableDelay table;
    for (Eigen::Index r = 0; r < pts.rows(); ++r) table.points.emplace_back(pts(r, 0), pts(r, 1));
    return table;
  }
  fail(path + ".kind", "unknown delay kind '" + k + "'");
}

json channel_json(const model::DelayChannel& ch) {
  struct Visitor {
    json operator()(const model::ConstantDelay& c) const {
      return {{"kind", "constant"}, {"value", c.value}};
    }
    json operator()(const model::SinusoidDelay& s) const {
      return {{"kind", "sinusoid"},
              {"offset", s.offset},
              {"amplitude", s.amplitude},
              {"frequency", s.frequency}};
    }
    json operator()(const model::TableDelay& t) const {
      json pts = json::array();
      for (const auto& [time, tau] : t.points) pts.push_back({time, tau});
      return {{"kind", "table"}, {"points", pts}};
    }
  };
  return std::visit(Visitor{}, ch);
}

ModeKind mode_of(const std::string& s, const std::string& path) {
  if (s == "time_varying") return ModeKind::TimeVarying;
  if (s == "constant_gamma") return ModeKind::ConstantGamma;
  if (s == "baseline") return ModeKind::Baseline;
  if (s == "observer") return ModeKind::Observer;
  if (s == "open_loop") return ModeKind::OpenLoop;
  fail(path, "unknown mode '" + s + "'");
}

}  // namespace

std::string_view to_string(ModeKind kind) {
  switch (kind) {
    case ModeKind::TimeVarying: return "time_varying";
    case ModeKind::ConstantGamma: return "constant_gamma";
    case ModeKind::Baseline: return "baseline";
    case ModeKind::Observer: return "observer";
    case ModeKind::OpenLoop: return "open_loop";
  }
  return "unknown";
}

model::Plant ScenarioConfig::plant() const { return model::Plant(A, B, C); }

model::DelayProfile ScenarioConfig::profile() const {
  return model::DelayProfile(channels, tauBar, d);
}

control::ControllerMode ScenarioConfig::controller_mode() const {
  switch (mode) {
    case ModeKind::TimeVarying: return control::TimeVaryingState{schedule};
    case ModeKind::ConstantGamma: return control::ConstantGammaState{gamma};
    case ModeKind::Baseline:
      return control::ConstantGammaState{
          schedule::baseline_gamma(static_cast<int>(A.rows()), tauBar)};
    case ModeKind::Observer: return control::ObserverBased{schedule, L};
    case ModeKind::OpenLoop: return control::OpenLoop{};
  }
  return control::OpenLoop{};
}

sim::SimConfig ScenarioConfig::sim_config() const {
  sim::SimConfig s;
  s.step = step;
  s.tEnd = tEnd;
  s.x0 = x0;
  s.xi0 = xi0;
  if (u0.size() > 0) {
    const Vector u = u0;
    s.u0History = [u](double) { return u; };
  }
  s.recordStride = recordStride;
  s.vanishingDelayPolicy = policy;
  s.k3 = k3;
  return s;
}

ScenarioConfig parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail("document", e.what());
  }
  if (!doc.is_object()) fail("document", "expected an object");
  ScenarioConfig cfg;

  const json& plant = field(doc, "plant", "");
  cfg.A = matrix_of(field(plant, "A", "plant"), "plant.A");
  const Eigen::Index n = cfg.A.rows();
  if (cfg.A.cols() != n) fail("plant.A", "must be square");
  const json& bs = field(plant, "B", "plant");
  if (!bs.is_array() || bs.empty()) fail("plant.B", "expected a nonempty list of matrices");
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const std::string path = "plant.B[" + std::to_string(i) + "]";
    Matrix bi = matrix_of(bs[i], path);
    if (bi.rows() != n) fail(path, "must have n rows");
    if (!cfg.B.empty() && bi.cols() != cfg.B.front().cols()) fail(path, "column count differs");
    cfg.B.push_back(std::move(bi));
  }
  if (plant.contains("C")) {
    cfg.C = matrix_of(plant.at("C"), "plant.C");
    if (cfg.C.cols() != n) fail("plant.C", "must have n columns");
  } else {
    cfg.C = Matrix::Identity(n, n);
  }
  const Eigen::Index m = cfg.B.front().cols();

  const json& delays = field(doc, "delays", "");
  cfg.tauBar = number(field(delays, "tau_bar", "delays"), "delays.tau_bar");
  cfg.d = number(field(delays, "d", "delays"), "delays.d");
  const json& chans = field(delays, "channels", "delays");
  if (!chans.is_array()) fail("delays.channels", "expected an array");
  for (std::size_t i = 0; i < chans.size(); ++i) {
    cfg.channels.push_back(channel_of(chans[i], "delays.channels[" + std::to_string(i) + "]"));
  }
  if (cfg.channels.size() != cfg.B.size()) {
    fail("delays.channels", "need one channel per input matrix");
  }

  const json& mode = field(doc, "mode", "");
  const json& kind = field(mode, "kind", "mode");
  if (!kind.is_string()) fail("mode.kind", "expected a string");
  cfg.mode = mode_of(kind.get<std::string>(), "mode.kind");
  if (cfg.mode == ModeKind::ConstantGamma) {
    cfg.gamma = number(field(mode, "gamma", "mode"), "mode.gamma");
    if (!(cfg.gamma > 0.0)) fail("mode.gamma", "must be positive");
  }
  if (cfg.mode == ModeKind::Observer) {
    cfg.L = matrix_of(field(mode, "L", "mode"), "mode.L");
    if (cfg.L.rows() != n || cfg.L.cols() != cfg.C.rows()) fail("mode.L", "must be n x p");
  }

  if (doc.contains("schedule")) {
    const json& s = doc.at("schedule");
    cfg.schedule.gamma0 = number_or(s, "gamma0", cfg.schedule.gamma0, "schedule");
    cfg.schedule.omega = number_or(s, "omega", cfg.schedule.omega, "schedule");
    cfg.schedule.mu = number_or(s, "mu", cfg.schedule.mu, "schedule");
  } else if (cfg.mode == ModeKind::TimeVarying || cfg.mode == ModeKind::Observer) {
    fail("schedule", "missing");
  }
  if (cfg.mode == ModeKind::TimeVarying || cfg.mode == ModeKind::Observer) {
    try {
      cfg.schedule.validate();
    } catch (const Error& e) {
      fail("schedule", e.what());
    }
  }

  const json& simj = field(doc, "sim", "");
  cfg.step = number_or(simj, "step", cfg.step, "sim");
  cfg.tEnd = number(field(simj, "t_end", "sim"), "sim.t_end");
  if (!(cfg.step > 0.0) || !(cfg.tEnd >= cfg.step)) fail("sim", "need 0 < step <= t_end");
  cfg.x0 = vector_of(field(simj, "x0", "sim"), "sim.x0");
  if (cfg.x0.size() != n) fail("sim.x0", "must have length n");
  if (simj.contains("xi0")) {
    cfg.xi0 = vector_of(simj.at("xi0"), "sim.xi0");
    if (cfg.xi0.size() != n) fail("sim.xi0", "must have length n");
  }
  if (simj.contains("u0")) {
    cfg.u0 = vector_of(simj.at("u0"), "sim.u0");
    if (cfg.u0.size() != m) fail("sim.u0", "must have length m");
  }
  if (simj.contains("record_stride")) {
    const json& rs = simj.at("record_stride");
    if (!rs.is_number_integer() || rs.get<long long>() < 1) {
      fail("sim.record_stride", "expected a positive integer");
    }
    cfg.recordStride = rs.get<int>();
  }
  cfg.k3 = number_or(simj, "k3", cfg.k3, "sim");
  if (simj.contains("vanishing_delay_policy")) {
    const json& p = simj.at("vanishing_delay_policy");
    const json& pk = field(p, "kind", "sim.vanishing_delay_policy");
    if (!pk.is_string()) fail("sim.vanishing_delay_policy.kind", "expected a string");
    const auto s = pk.get<std::string>();
    if (s == "extrapolate") {
      cfg.policy.kind = sim::VanishingDelayPolicy::Kind::Extrapolate;
    } else if (s == "predictor_corrector") {
      cfg.policy.kind = sim::VanishingDelayPolicy::Kind::PredictorCorrector;
      if (p.contains("iterations")) {
        const json& it = p.at("iterations");
        if (!it.is_number_integer() || it.get<long long>() < 1) {
          fail("sim.vanishing_delay_policy.iterations", "expected a positive integer");
        }
        cfg.policy.iterations = it.get<int>();
      }
    } else {
      fail("sim.vanishing_delay_policy.kind", "unknown policy '" + s + "'");
    }
  }

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    for (const char* key : {"csv", "plot"}) {
      if (!o.contains(key)) continue;
      if (!o.at(key).is_string()) fail(std::string("output.") + key, "expected a string");
      (std::string(key) == "csv" ? cfg.csvPath : cfg.plotPath) = o.at(key).get<std::string>();
    }
  }
  if (doc.contains("rng_seed")) {
    const json& s = doc.at("rng_seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      fail("rng_seed", "expected a nonnegative integer");
    }
    cfg.rngSeed = s.get<std::uint64_t>();
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) { return parse_scenario(read_text_file(path)); }

std::string serialize_scenario(const ScenarioConfig& cfg) {
  json doc;
  json bs = json::array();
  for (const auto& b : cfg.B) bs.push_back(to_json(b));
  doc["plant"] = {{"A", to_json(cfg.A)}, {"B", bs}, {"C", to_json(cfg.C)}};
  json chans = json::array();
  for (const auto& ch : cfg.channels) chans.push_back(channel_json(ch));
  doc["delays"] = {{"tau_bar", cfg.tauBar}, {"d", cfg.d}, {"channels", chans}};
  json mode = {{"kind", std::string(to_string(cfg.mode))}};
  if (cfg.mode == ModeKind::ConstantGamma) mode["gamma"] = cfg.gamma;
  if (cfg.mode == ModeKind::Observer) mode["L"] = to_json(cfg.L);
  doc["mode"] = mode;
  doc["schedule"] = {
      {"gamma0", cfg.schedule.gamma0}, {"omega", cfg.schedule.omega}, {"mu", cfg.schedule.mu}};
  json simj = {{"step", cfg.step},
               {"t_end", cfg.tEnd},
               {"x0", to_json(cfg.x0)},
               {"record_stride", cfg.recordStride},
               {"k3", cfg.k3}};
  if (cfg.xi0.size() > 0) simj["xi0"] = to_json(cfg.xi0);
  if (cfg.u0.size() > 0) simj["u0"] = to_json(cfg.u0);
  if (cfg.policy.kind == sim::VanishingDelayPolicy::Kind::Extrapolate) {
    simj["vanishing_delay_policy"] = {{"kind", "extrapolate"}};
  } else {
    simj["vanishing_delay_policy"] = {{"kind", "predictor_corrector"},
                                      {"iterations", cfg.policy.iterations}};
  }
  doc["sim"] = simj;
  json out = json::object();
  if (cfg.csvPath) out["csv"] = *cfg.csvPath;
  if (cfg.plotPath) out["plot"] = *cfg.plotPath;
  if (!out.empty()) doc["output"] = out;
  doc["rng_seed"] = cfg.rngSeed;
  return doc.dump(2) + "\n";
}

RunReport run_scenario(const ScenarioConfig& cfg) {
  RunReport report;
  const model::Plant plant = cfg.plant();
  std::optional<model::DelayProfile> profile;
  try {
    profile.emplace(cfg.profile());
  } catch (const Error& e) {
    report.exitCode = kAssumptionFailure;
    report.message = std::string("Assumption 3 violated: ") + e.what();
    return report;
  }
  const control::ControllerMode mode = cfg.controller_mode();
  const bool feedback = cfg.mode != ModeKind::OpenLoop;

  const model::Assumption1Report a1 = model::verify_assumption1(plant);
  if (feedback && !a1.pass()) {
    report.exitCode = kAssumptionFailure;
    report.message = "Assumption 1 violated: controllable=" + std::string(a1.controllable ? "yes" : "no") +
                     " (rank " + std::to_string(a1.controllabilityRank) + " of " +
                     std::to_string(plant.n()) + "), nilpotent=" + (a1.nilpotent ? "yes" : "no");
    return report;
  }
  const model::Assumption3Report a3 = model::verify_assumption3(*profile, cfg.tEnd, cfg.step / 4.0);
  if (!a3.pass) {
    report.exitCode = kAssumptionFailure;
    report.message = "Assumption 3 violated: observed tau in [" + std::to_string(a3.tauMinObserved) +
                     ", " + std::to_string(a3.tauBarObserved) + "], max rate " +
                     std::to_string(a3.dObserved);
    return report;
  }
  if (cfg.mode == ModeKind::Observer) {
    try {
      (void)control::validate_observer_gain(plant, cfg.L);
    } catch (const Error& e) {
      report.exitCode = kAssumptionFailure;
      report.message = std::string("observer gain rejected: ") + e.what();
      return report;
    }
  }
  if (feedback) {
    const double g0 = control::mode_gamma(mode, 0.0).value();
    report.diagnostics = ple::diagnose(ple::Solver(plant.a(), plant.b()), g0);
  }

  sim::Trajectory traj =
      sim::integrate_closed_loop(plant, *profile, mode, cfg.sim_config());
  if (cfg.csvPath) write_trajectory_csv(traj, *cfg.csvPath);
  if (cfg.plotPath) {
    std::vector<PlotSeries> series{{"|x|", traj.times, traj.normX}};
    if (traj.observer) series.push_back({"|e|", traj.times, traj.normE});
    write_norm_plot_svg(series, "state norm", *cfg.plotPath);
  }
  if (traj.status == sim::SimStatus::NonFiniteState) {
    report.exitCode = kNonFiniteState;
    report.message = "NonFiniteState: integration diverged";
  } else {
    report.message = "ok";
  }
  report.trajectory = std::move(traj);
  return report;
}

}  // namespace lowgain::cli
