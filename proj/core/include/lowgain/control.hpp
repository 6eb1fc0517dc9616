#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "lowgain/model.hpp"
#include "lowgain/ple.hpp"
#include "lowgain/schedule.hpp"

namespace lowgain::control {

using linalg::Matrix;
using linalg::Vector;

/// u = -B^T P(gamma(t)) x.
struct TimeVaryingState {
  schedule::GainSchedule schedule;
};

/// u = -B^T P(gamma) x with a fixed gamma.
struct ConstantGammaState {
  double gamma = 0.0;
};

/// xi' = A xi + L (y - C xi),  u = -B^T P(gamma(t)) xi.
struct ObserverBased {
  schedule::GainSchedule schedule;
  Matrix L;
};

struct OpenLoop {};

using ControllerMode = std::variant<TimeVaryingState, ConstantGammaState, ObserverBased, OpenLoop>;

[[nodiscard]] bool is_observer(const ControllerMode& mode);
[[nodiscard]] bool is_open_loop(const ControllerMode& mode);
/// gamma used by the mode at time t; empty for OpenLoop.
[[nodiscard]] std::optional<double> mode_gamma(const ControllerMode& mode, double t);

/// Direct evaluation: solves the PLE at gamma(t) on every call.
[[nodiscard]] Vector control_input(const model::Plant& plant, const ControllerMode& mode, double t,
                                   const Vector& state_or_estimate);

/// P(gamma) and dP/dgamma tabulated on log-spaced nodes over [gamma_lo, gamma_hi]
/// and evaluated by cubic Hermite interpolation in gamma. Queries outside the
/// range fall back to a direct solve.
class GainTable {
 public:
  GainTable(ple::Solver solver, double gamma_lo, double gamma_hi, int points_per_decade = 1000);

  [[nodiscard]] Matrix p(double gamma) const;
  /// K = B^T P(gamma).
  [[nodiscard]] Matrix gain(double gamma) const;
  [[nodiscard]] double gamma_lo() const noexcept { return gammas_.front(); }
  [[nodiscard]] double gamma_hi() const noexcept { return gammas_.back(); }
  [[nodiscard]] std::size_t size() const noexcept { return gammas_.size(); }

 private:
  ple::Solver solver_;
  std::vector<double> gammas_;
  std::vector<Matrix> p_;
  std::vector<Matrix> dp_;
  double log_lo_ = 0.0;
  double log_step_ = 0.0;
};

/// Feedback law bound to a plant and mode, with the gains it needs over
/// [0, horizon] precomputed.
class FeedbackLaw {
 public:
  FeedbackLaw(const model::Plant& plant, ControllerMode mode, double horizon);

  [[nodiscard]] const ControllerMode& mode() const noexcept { return mode_; }
  /// NaN for OpenLoop.
  [[nodiscard]] double gamma(double t) const;
  /// m x n gain K(t); zero for OpenLoop.
  [[nodiscard]] Matrix gain(double t) const;
  /// P(gamma(t)); empty for OpenLoop.
  [[nodiscard]] std::optional<Matrix> p(double t) const;
  /// -K(t) z.
  [[nodiscard]] Vector input(double t, const Vector& z) const;

 private:
  Matrix b_;
  ControllerMode mode_;
  std::optional<ple::Solver> solver_;
  std::shared_ptr<const GainTable> table_;
  Matrix constant_p_;
};

struct ObserverCertificate {
  Matrix L;
  Matrix Q;
  double rho = 0.0;
  /// -max Re lambda(A - L C).
  double hurwitzMargin = 0.0;
};

/// Q solves (A - LC)^T Q + Q (A - LC) = -I and rho = 1 / lambda_max(Q).
/// Throws NotObservable, NotHurwitz or DimensionMismatch.
[[nodiscard]] ObserverCertificate validate_observer_gain(const model::Plant& plant, const Matrix& l);

/// A xi + L (y - C xi).
[[nodiscard]] Vector observer_rhs(const model::Plant& plant, const Matrix& l, const Vector& xi,
                                  const Vector& y);

/// Best effort: places every eigenvalue of A - LC at `pole` through Ackermann's
/// formula on (A^T, c_i^T) for the first output row c_i that observes A alone.
/// Throws NotObservable when no single output does.
[[nodiscard]] Matrix place_repeated_observer_pole(const model::Plant& plant, double pole);

}  // namespace lowgain::control
