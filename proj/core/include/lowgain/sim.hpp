#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lowgain/control.hpp"
#include "lowgain/model.hpp"

// Fixed-step RK4 for x' = A x + sum_i B_i u(t - tau_i(t)) with
// u(s) = -B^T P(gamma(s)) z(s), where z is x (state feedback) or the observer
// state xi. Delayed values of z come from a cubic Hermite history; u0 covers
// s < 0.
namespace lowgain::sim {

using linalg::Matrix;
using linalg::Vector;

struct VanishingDelayPolicy {
  enum class Kind { Extrapolate, PredictorCorrector };
  Kind kind = Kind::PredictorCorrector;
  /// Total passes per step for PredictorCorrector.
  int iterations = 2;
};

struct SimConfig {
  double step = 1e-3;
  double tEnd = 10.0;
  Vector x0;
  /// Observer initial state; zero when empty.
  Vector xi0;
  /// Input history for s < 0; zero when empty.
  std::function<Vector(double)> u0History;
  int recordStride = 10;
  VanishingDelayPolicy vanishingDelayPolicy;
  /// Weight of the integral term in the Krasovskii monitor.
  double k3 = 1.0;
};

enum class SimStatus { Completed, NonFiniteState };

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> x;
  std::vector<Vector> u;
  std::vector<double> gammas;
  /// Observer runs only.
  std::vector<Vector> xi;
  std::vector<Vector> e;
  std::vector<double> normX;
  std::vector<double> V0;
  /// NaN until 2 tau_bar of history exists.
  std::vector<double> V;
  std::vector<double> normE;

  bool observer = false;
  double tauBar = 0.0;
  double k3 = 1.0;
  SimStatus status = SimStatus::Completed;
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
};

/// Nodes (t, z, z') on a uniform grid, trimmed to a trailing window, with
/// cubic Hermite interpolation between nodes.
class HistoryBuffer {
 public:
  HistoryBuffer(double step, double window);

  /// Appends a node; t must exceed the last node time.
  void push(double t, const Vector& z, const Vector& dz);
  [[nodiscard]] bool empty() const noexcept { return nodes_.empty(); }
  [[nodiscard]] double front_time() const;
  [[nodiscard]] double back_time() const;
  /// Hermite interpolation for s in [front_time, back_time]. Throws
  /// InsufficientHistory outside.
  [[nodiscard]] Vector value(double s) const;
  /// Continues the last Hermite segment past back_time (Taylor step with a
  /// single node).
  [[nodiscard]] Vector extrapolate(double s) const;

 private:
  struct Node {
    double t;
    Vector z;
    Vector dz;
  };
  double step_;
  double window_;
  std::deque<Node> nodes_;
};

[[nodiscard]] Vector hermite(double t0, const Vector& z0, const Vector& dz0, double t1,
                             const Vector& z1, const Vector& dz1, double s);

/// Throws HypothesisViolated when a feedback mode's pair fails Assumption 1,
/// InvalidDelayProfile when the profile leaves its declared bounds on
/// [0, tEnd], and the observer certificate errors in observer mode.
[[nodiscard]] Trajectory integrate_closed_loop(const model::Plant& plant,
                                               const model::DelayProfile& profile,
                                               const control::ControllerMode& mode,
                                               const SimConfig& config);

/// x^T P x.
[[nodiscard]] double evaluate_v0(const Matrix& p, const Vector& x);

/// V0(t) + k3 * int_{t - 2 tau_bar}^{t} (3 + (s - t)/tau_bar) gamma^3(s) V0(s) ds,
/// trapezoid on the recorded grid with linear interpolation at the window
/// start. Throws InsufficientHistory when the window leaves the record.
[[nodiscard]] double evaluate_krasovskii(const Trajectory& traj, double k3, double tau_bar,
                                         double t);

struct SettlingMetrics {
  double peak = 0.0;
  std::optional<double> settlingTime;
};

[[nodiscard]] SettlingMetrics settling_metrics(std::span<const double> times,
                                               std::span<const double> norms, double fraction);
[[nodiscard]] SettlingMetrics settling_metrics(const Trajectory& traj, double fraction);

/// Earliest recorded time after which the finite values never increase by
/// more than rel_tol * |previous| + abs_tol from one sample to the next.
/// Empty when there are no finite values.
[[nodiscard]] std::optional<double> eventual_monotone_time(std::span<const double> times,
                                                           std::span<const double> values,
                                                           double rel_tol = 1e-9,
                                                           double abs_tol = 0.0);

}  // namespace lowgain::sim
