#include "lowgain/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lowgain::sim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kBlowUp = 1e100;

}  // namespace

Vector hermite(double t0, const Vector& z0, const Vector& dz0, double t1, const Vector& z1,
               const Vector& dz1, double s) {
  const double h = t1 - t0;
  const double r = (s - t0) / h;
  const double r2 = r * r;
  const double r3 = r2 * r;
  const double h00 = 2.0 * r3 - 3.0 * r2 + 1.0;
  const double h10 = r3 - 2.0 * r2 + r;
  const double h01 = -2.0 * r3 + 3.0 * r2;
  const double h11 = r3 - r2;
  return h00 * z0 + (h10 * h) * dz0 + h01 * z1 + (h11 * h) * dz1;
}

HistoryBuffer::HistoryBuffer(double step, double window) : step_(step), window_(window) {
  if (!(step > 0.0) || !(window >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "history needs step > 0 and window >= 0");
  }
}

void HistoryBuffer::push(double t, const Vector& z, const Vector& dz) {
  if (!nodes_.empty() && !(t > nodes_.back().t)) {
    throw Error(ErrorKind::InvalidArgument, "history nodes must be pushed in time order");
  }
  nodes_.push_back({t, z, dz});
  const double keep_from = t - window_ - 2.0 * step_;
  while (nodes_.size() > 2 && nodes_[1].t <= keep_from) nodes_.pop_front();
}

double HistoryBuffer::front_time() const {
  if (nodes_.empty()) throw Error(ErrorKind::InsufficientHistory, "history is empty");
  return nodes_.front().t;
}

double HistoryBuffer::back_time() const {
  if (nodes_.empty()) throw Error(ErrorKind::InsufficientHistory, "history is empty");
  return nodes_.back().t;
}

Vector HistoryBuffer::value(double s) const {
  if (nodes_.empty() || s < nodes_.front().t || s > nodes_.back().t) {
    throw Error(ErrorKind::InsufficientHistory, "lookup outside the stored history");
  }
  const auto last = static_cast<std::ptrdiff_t>(nodes_.size()) - 1;
  if (last == 0) return nodes_.front().z;
  auto i = static_cast<std::ptrdiff_t>(std::floor((s - nodes_.front().t) / step_));
  i = std::clamp<std::ptrdiff_t>(i, 0, last - 1);
  while (i > 0 && s < nodes_[static_cast<std::size_t>(i)].t) --i;
  while (i < last - 1 && s > nodes_[static_cast<std::size_t>(i + 1)].t) ++i;
  const Node& a = nodes_[static_cast<std::size_t>(i)];
  const Node& b = nodes_[static_cast<std::size_t>(i + 1)];
  if (s == a.t) return a.z;
  if (s == b.t) return b.z;
  return hermite(a.t, a.z, a.dz, b.t, b.z, b.dz, s);
}

Vector HistoryBuffer::extrapolate(double s) const {
  if (nodes_.empty()) throw Error(ErrorKind::InsufficientHistory, "history is empty");
  const Node& b = nodes_.back();
  if (nodes_.size() == 1) return b.z + (s - b.t) * b.dz;
  const Node& a = nodes_[nodes_.size() - 2];
  return hermite(a.t, a.z, a.dz, b.t, b.z, b.dz, s);
}

namespace {

// In-step data for lookups that land between the last history node and the
// current stage time.
struct Segment {
  bool active = false;
  double t0 = 0.0;
  double t1 = 0.0;
  Vector z0, dz0, z1, dz1;
};

class ClosedLoop {
 public:
  ClosedLoop(const model::Plant& plant, const model::DelayProfile& profile,
             const control::ControllerMode& mode, const SimConfig& config)
      : plant_(plant),
        profile_(profile),
        law_(plant, mode, config.tEnd),
        config_(config),
        observer_(control::is_observer(mode)),
        n_(plant.n()),
        history_(config.step, profile.tau_bar()) {
    if (observer_) l_ = std::get<control::ObserverBased>(mode).L;
    // t - tau_i(t) is increasing (d < 1); its zero is where u0 hands over to
    // the feedback law and the delayed input jumps.
    for (int i = 0; i < profile.q(); ++i) {
      double lo = 0.0;
      double hi = profile.tau_bar();
      if (model::delay_value(profile, i, 0.0) <= 0.0) {
        breakpoints_.push_back(0.0);
        continue;
      }
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (mid - model::delay_value(profile, i, mid) < 0.0 ? lo : hi) = mid;
      }
      breakpoints_.push_back(hi);
    }
  }

  [[nodiscard]] const std::vector<double>& breakpoints() const { return breakpoints_; }

  [[nodiscard]] bool observer() const { return observer_; }
  [[nodiscard]] const control::FeedbackLaw& law() const { return law_; }

  Vector fed_back(const Vector& y) const { return observer_ ? Vector(y.tail(n_)) : Vector(y.head(n_)); }

  // Right-hand side at time t for stacked state y = [x; xi].
  // side < 0 (> 0) evaluates channels whose delayed time crosses zero at t
  // with the left (right) limit of the input.
  Vector rhs(double t, const Vector& y, const Segment& segment, bool& in_step,
             int side = 0) const {
    const Vector x = y.head(n_);
    Vector dx = plant_.a() * x;
    const Vector z = fed_back(y);
    const double back = history_.empty() ? -1.0 : history_.back_time();
    for (int i = 0; i < plant_.q(); ++i) {
      double s = t - model::delay_value(profile_, i, t);
      bool before_start = s < 0.0;
      const double bp = breakpoints_[static_cast<std::size_t>(i)];
      if (side != 0 && std::abs(t - bp) <= 1e-12 * std::max(1.0, bp)) before_start = side < 0;
      if (!before_start) s = std::max(s, 0.0);
      Vector u;
      if (before_start) {
        u = initial_input(std::min(s, 0.0));
      } else if (s >= t) {
        u = law_.input(s, z);
      } else if (s <= back) {
        u = law_.input(s, history_.value(s));
      } else {
        in_step = true;
        const Vector zs = segment.active ? hermite(segment.t0, segment.z0, segment.dz0, segment.t1,
                                                   segment.z1, segment.dz1, s)
                                         : history_.extrapolate(s);
        u = law_.input(s, zs);
      }
      dx += plant_.bs()[static_cast<std::size_t>(i)] * u;
    }
    if (!observer_) return dx;
    Vector dy(2 * n_);
    dy.head(n_) = dx;
    const Vector xi = y.tail(n_);
    dy.tail(n_) = control::observer_rhs(plant_, l_, xi, plant_.c() * x);
    return dy;
  }

  Vector initial_input(double s) const {
    if (!config_.u0History) return Vector::Zero(plant_.m());
    Vector u = config_.u0History(s);
    if (u.size() != plant_.m()) {
      throw Error(ErrorKind::DimensionMismatch, "u0 history must return m-vectors");
    }
    return u;
  }

  void push(double t, const Vector& y, const Vector& dy) {
    history_.push(t, fed_back(y), fed_back(dy));
  }

  const HistoryBuffer& history() const { return history_; }

 private:
  const model::Plant& plant_;
  const model::DelayProfile& profile_;
  control::FeedbackLaw law_;
  const SimConfig& config_;
  bool observer_;
  int n_;
  Matrix l_;
  HistoryBuffer history_;
  std::vector<double> breakpoints_;
};

bool blown_up(const Vector& y) { return !y.allFinite() || y.cwiseAbs().maxCoeff() > kBlowUp; }

}  // namespace

Trajectory integrate_closed_loop(const model::Plant& plant, const model::DelayProfile& profile,
                                 const control::ControllerMode& mode, const SimConfig& config) {
  const int n = plant.n();
  const double h = config.step;
  if (!(h > 0.0) || !(config.tEnd >= h)) {
    throw Error(ErrorKind::InvalidArgument, "need 0 < step <= tEnd");
  }
  if (config.recordStride < 1) throw Error(ErrorKind::InvalidArgument, "recordStride must be >= 1");
  if (config.vanishingDelayPolicy.kind == VanishingDelayPolicy::Kind::PredictorCorrector &&
      config.vanishingDelayPolicy.iterations < 1) {
    throw Error(ErrorKind::InvalidArgument, "predictor-corrector needs iterations >= 1");
  }
  if (config.x0.size() != n) throw Error(ErrorKind::DimensionMismatch, "x0 must have length n");
  if (profile.q() != plant.q()) {
    throw Error(ErrorKind::DimensionMismatch, "one delay channel per input matrix is required");
  }
  linalg::require_finite(config.x0, "x0");

  Trajectory traj;
  traj.observer = control::is_observer(mode);
  traj.tauBar = profile.tau_bar();
  traj.k3 = config.k3;

  const model::Assumption1Report a1 = model::verify_assumption1(plant);
  if (!control::is_open_loop(mode) && !a1.pass()) {
    throw Error(ErrorKind::HypothesisViolated,
                "Assumption 1 fails: (A, B) must be controllable with A nilpotent");
  }
  if (!a1.pass()) traj.warnings.push_back("Assumption 1 does not hold for the open-loop plant");

  const model::Assumption3Report a3 = model::verify_assumption3(profile, config.tEnd, h / 4.0);
  if (!a3.pass) {
    throw Error(ErrorKind::InvalidDelayProfile,
                "delays leave [0, tau_bar] or exceed the declared rate d on [0, tEnd]");
  }
  const bool extrapolate_only =
      config.vanishingDelayPolicy.kind == VanishingDelayPolicy::Kind::Extrapolate;
  if (extrapolate_only && a3.tauMinObserved < h && h > profile.tau_bar() / 4.0) {
    traj.warnings.push_back("StepTooLarge: step exceeds tau_bar/4 with vanishing delays");
  }

  if (traj.observer) {
    (void)control::validate_observer_gain(plant, std::get<control::ObserverBased>(mode).L);
  }

  ClosedLoop loop(plant, profile, mode, config);
  const int dim = traj.observer ? 2 * n : n;
  Vector y(dim);
  y.head(n) = config.x0;
  if (traj.observer) {
    if (config.xi0.size() == 0) {
      y.tail(n).setZero();
    } else if (config.xi0.size() != n) {
      throw Error(ErrorKind::DimensionMismatch, "xi0 must have length n");
    } else {
      y.tail(n) = config.xi0;
    }
  }

  const auto total = static_cast<long long>(std::llround(config.tEnd / h));
  const int passes = extrapolate_only ? 1 : config.vanishingDelayPolicy.iterations;

  auto record = [&](double t, const Vector& state) {
    const Vector x = state.head(n);
    const Vector z = loop.fed_back(state);
    traj.times.push_back(t);
    traj.x.push_back(x);
    traj.u.push_back(loop.law().input(t, z));
    traj.gammas.push_back(loop.law().gamma(t));
    traj.normX.push_back(x.norm());
    const auto p = loop.law().p(t);
    traj.V0.push_back(p ? evaluate_v0(*p, x) : kNaN);
    if (traj.observer) {
      const Vector xi = state.tail(n);
      traj.xi.push_back(xi);
      traj.e.push_back(xi - x);
      traj.normE.push_back((xi - x).norm());
    }
  };

  Segment none;
  bool in_step = false;
  Vector dy = loop.rhs(0.0, y, none, in_step);
  loop.push(0.0, y, dy);
  record(0.0, y);
  Vector k1 = dy;

  for (long long step = 0; step < total; ++step) {
    const double t0 = static_cast<double>(step) * h;
    const double t1 = static_cast<double>(step + 1) * h;
    const double tm = t0 + 0.5 * h;
    Segment segment;
    Vector next;
    std::vector<double> cuts;
    for (double bp : loop.breakpoints()) {
      if (bp > t0 + 1e-12 && bp < t1 - 1e-12) cuts.push_back(bp);
    }
    std::sort(cuts.begin(), cuts.end());
    if (!cuts.empty()) {
      // Split the step at the input discontinuities.
      cuts.push_back(t1);
      double a = t0;
      Vector ya = y;
      Vector ka = k1;
      bool flag = false;
      for (std::size_t j = 0; j < cuts.size(); ++j) {
        const double c = cuts[j];
        const double hs = c - a;
        const double mid = a + 0.5 * hs;
        const int end_side = j + 1 < cuts.size() ? -1 : 0;
        const Vector k2 = loop.rhs(mid, ya + (0.5 * hs) * ka, segment, flag);
        const Vector k3 = loop.rhs(mid, ya + (0.5 * hs) * k2, segment, flag);
        const Vector k4 = loop.rhs(c, ya + hs * k3, segment, flag, end_side);
        ya = ya + (hs / 6.0) * (ka + 2.0 * k2 + 2.0 * k3 + k4);
        a = c;
        if (j + 1 < cuts.size()) ka = loop.rhs(a, ya, segment, flag, 1);
      }
      next = ya;
    }
    for (int pass = 0; cuts.empty() && pass < passes; ++pass) {
      bool flag = false;
      const Vector k2 = loop.rhs(tm, y + (0.5 * h) * k1, segment, flag);
      const Vector k3 = loop.rhs(tm, y + (0.5 * h) * k2, segment, flag);
      const Vector k4 = loop.rhs(t1, y + h * k3, segment, flag);
      next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!flag || pass + 1 == passes) break;
      bool ignored = false;
      const Vector dnext = loop.rhs(t1, next, segment, ignored);
      segment.active = true;
      segment.t0 = t0;
      segment.t1 = t1;
      segment.z0 = loop.fed_back(y);
      segment.dz0 = loop.fed_back(k1);
      segment.z1 = loop.fed_back(next);
      segment.dz1 = loop.fed_back(dnext);
    }
    y = next;
    if (blown_up(y)) {
      traj.status = SimStatus::NonFiniteState;
      traj.warnings.push_back("NonFiniteState at t = " + std::to_string(t1));
      break;
    }
    // Node derivative at t1, then the next step's k1 from the final history.
    bool node_in_step = false;
    if (segment.active) segment.z1 = loop.fed_back(y);
    dy = loop.rhs(t1, y, segment, node_in_step);
    loop.push(t1, y, dy);
    if (node_in_step) {
      bool ignored = false;
      k1 = loop.rhs(t1, y, none, ignored);
    } else {
      k1 = dy;
    }
    if ((step + 1) % config.recordStride == 0) record(t1, y);
  }

  traj.V.assign(traj.size(), kNaN);
  const double window = 2.0 * profile.tau_bar();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.times[i] - window < traj.times.front() - 1e-12) continue;
    if (std::isnan(traj.V0[i])) continue;
    traj.V[i] = evaluate_krasovskii(traj, config.k3, profile.tau_bar(), traj.times[i]);
  }
  return traj;
}

double evaluate_v0(const Matrix& p, const Vector& x) {
  if (p.rows() != x.size() || p.cols() != x.size()) {
    throw Error(ErrorKind::DimensionMismatch, "P and x sizes differ");
  }
  return x.dot(p * x);
}

double evaluate_krasovskii(const Trajectory& traj, double k3, double tau_bar, double t) {
  const auto& ts = traj.times;
  if (ts.empty() || !(tau_bar > 0.0)) {
    throw Error(ErrorKind::InsufficientHistory, "empty trajectory or tau_bar <= 0");
  }
  const double start = t - 2.0 * tau_bar;
  constexpr double slack = 1e-12;
  if (start < ts.front() - slack || t > ts.back() + slack) {
    throw Error(ErrorKind::InsufficientHistory, "trajectory does not cover [t - 2 tau_bar, t]");
  }
  auto value_at = [&](std::size_t i) {
    const double w = 3.0 + (ts[i] - t) / tau_bar;
    const double g = traj.gammas[i];
    return w * g * g * g * traj.V0[i];
  };
  auto interp = [&](double s) {
    auto it = std::lower_bound(ts.begin(), ts.end(), s);
    if (it == ts.end()) --it;
    auto i = static_cast<std::size_t>(it - ts.begin());
    if (i == 0 || ts[i] == s) return std::pair<double, double>(value_at(i), traj.V0[i]);
    const double a = (s - ts[i - 1]) / (ts[i] - ts[i - 1]);
    return std::pair<double, double>((1 - a) * value_at(i - 1) + a * value_at(i),
                                     (1 - a) * traj.V0[i - 1] + a * traj.V0[i]);
  };

  const auto [end_integrand, v0_end] = interp(t);
  auto first = std::upper_bound(ts.begin(), ts.end(), std::max(start, ts.front()));
  auto last = std::lower_bound(ts.begin(), ts.end(), t);
  double prev_s = std::max(start, ts.front());
  double prev_f = interp(prev_s).first;
  double integral = 0.0;
  for (auto it = first; it != last; ++it) {
    const auto i = static_cast<std::size_t>(it - ts.begin());
    const double f = value_at(i);
    integral += 0.5 * (f + prev_f) * (ts[i] - prev_s);
    prev_s = ts[i];
    prev_f = f;
  }
  integral += 0.5 * (end_integrand + prev_f) * (t - prev_s);
  return v0_end + k3 * integral;
}

SettlingMetrics settling_metrics(std::span<const double> times, std::span<const double> norms,
                                 double fraction) {
  if (times.empty() || times.size() != norms.size()) {
    throw Error(ErrorKind::InvalidArgument, "settling metrics need matching nonempty series");
  }
  SettlingMetrics m;
  m.peak = *std::max_element(norms.begin(), norms.end());
  if (m.peak == 0.0) {
    m.settlingTime = times.front();
    return m;
  }
  const double level = fraction * m.peak;
  std::size_t last_above = times.size();
  for (std::size_t i = times.size(); i-- > 0;) {
    if (!(norms[i] <= level)) {
      last_above = i;
      break;
    }
  }
  if (last_above == times.size()) {
    m.settlingTime = times.front();
  } else if (last_above + 1 < times.size()) {
    m.settlingTime = times[last_above + 1];
  }
  return m;
}

SettlingMetrics settling_metrics(const Trajectory& traj, double fraction) {
  return settling_metrics(traj.times, traj.normX, fraction);
}

std::optional<double> eventual_monotone_time(std::span<const double> times,
                                             std::span<const double> values, double rel_tol,
                                             double abs_tol) {
  std::optional<std::size_t> first_finite;
  std::optional<std::size_t> last_rise;
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    if (!first_finite) first_finite = i;
    if (prev && values[i] > values[*prev] + rel_tol * std::abs(values[*prev]) + abs_tol) {
      last_rise = i;
    }
    prev = i;
  }
  if (!first_finite) return std::nullopt;
  return times[last_rise.value_or(*first_finite)];
}

}  // namespace lowgain::sim
