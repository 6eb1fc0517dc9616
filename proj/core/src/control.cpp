#include "lowgain/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace lowgain::control {

bool is_observer(const ControllerMode& mode) {
  return std::holds_alternative<ObserverBased>(mode);
}

bool is_open_loop(const ControllerMode& mode) { return std::holds_alternative<OpenLoop>(mode); }

std::optional<double> mode_gamma(const ControllerMode& mode, double t) {
  if (const auto* m = std::get_if<TimeVaryingState>(&mode)) {
    return schedule::gamma_at(m->schedule, t).gamma;
  }
  if (const auto* m = std::get_if<ObserverBased>(&mode)) {
    return schedule::gamma_at(m->schedule, t).gamma;
  }
  if (const auto* m = std::get_if<ConstantGammaState>(&mode)) return m->gamma;
  return std::nullopt;
}

Vector control_input(const model::Plant& plant, const ControllerMode& mode, double t,
                     const Vector& state_or_estimate) {
  if (state_or_estimate.size() != plant.n()) {
    throw Error(ErrorKind::DimensionMismatch, "state must have length n");
  }
  const auto gamma = mode_gamma(mode, t);
  if (!gamma) return Vector::Zero(plant.m());
  const Matrix p = ple::Solver(plant.a(), plant.b()).solve(*gamma).P;
  return -(plant.b().transpose() * (p * state_or_estimate));
}

GainTable::GainTable(ple::Solver solver, double gamma_lo, double gamma_hi, int points_per_decade)
    : solver_(std::move(solver)) {
  if (!(gamma_lo > 0.0) || !(gamma_hi >= gamma_lo) || points_per_decade < 1) {
    throw Error(ErrorKind::InvalidArgument, "gain table needs 0 < gamma_lo <= gamma_hi");
  }
  log_lo_ = std::log(gamma_lo);
  const double span = std::log(gamma_hi) - log_lo_;
  const int intervals =
      std::max(1, static_cast<int>(std::ceil(span / std::log(10.0) * points_per_decade)));
  log_step_ = span / intervals;
  gammas_.reserve(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) {
    const double g = i == intervals ? gamma_hi : std::exp(log_lo_ + log_step_ * i);
    const ple::Solution sol = solver_.solve(g);
    gammas_.push_back(g);
    p_.push_back(sol.P);
    dp_.push_back(sol.dPdGamma);
  }
  gammas_.front() = gamma_lo;
}

Matrix GainTable::p(double gamma) const {
  if (gamma < gammas_.front() || gamma > gammas_.back()) return solver_.solve(gamma).P;
  const auto last = static_cast<std::ptrdiff_t>(gammas_.size()) - 1;
  if (last == 0) return p_.front();
  auto i = static_cast<std::ptrdiff_t>(std::floor((std::log(gamma) - log_lo_) / log_step_));
  i = std::clamp<std::ptrdiff_t>(i, 0, last - 1);
  while (i > 0 && gamma < gammas_[static_cast<std::size_t>(i)]) --i;
  while (i < last - 1 && gamma > gammas_[static_cast<std::size_t>(i + 1)]) ++i;
  const auto k = static_cast<std::size_t>(i);
  const double h = gammas_[k + 1] - gammas_[k];
  const double s = (gamma - gammas_[k]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * p_[k] + (h10 * h) * dp_[k] + h01 * p_[k + 1] + (h11 * h) * dp_[k + 1];
}

Matrix GainTable::gain(double gamma) const { return solver_.b().transpose() * p(gamma); }

FeedbackLaw::FeedbackLaw(const model::Plant& plant, ControllerMode mode, double horizon)
    : b_(plant.b()), mode_(std::move(mode)) {
  if (is_open_loop(mode_)) return;
  solver_.emplace(plant.a(), plant.b());
  if (const auto* c = std::get_if<ConstantGammaState>(&mode_)) {
    if (!(c->gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
    constant_p_ = solver_->solve(c->gamma).P;
    return;
  }
  const schedule::GainSchedule& s = std::holds_alternative<TimeVaryingState>(mode_)
                                        ? std::get<TimeVaryingState>(mode_).schedule
                                        : std::get<ObserverBased>(mode_).schedule;
  s.validate();
  const double lo = schedule::gamma_at(s, std::max(0.0, horizon)).gamma;
  table_ = std::make_shared<const GainTable>(*solver_, lo, s.gamma0);
}

double FeedbackLaw::gamma(double t) const {
  return mode_gamma(mode_, t).value_or(std::numeric_limits<double>::quiet_NaN());
}

std::optional<Matrix> FeedbackLaw::p(double t) const {
  if (is_open_loop(mode_)) return std::nullopt;
  if (table_) return table_->p(gamma(t));
  return constant_p_;
}

Matrix FeedbackLaw::gain(double t) const {
  const auto pm = p(t);
  if (!pm) return Matrix::Zero(b_.cols(), b_.rows());
  return b_.transpose() * *pm;
}

Vector FeedbackLaw::input(double t, const Vector& z) const {
  if (is_open_loop(mode_)) return Vector::Zero(b_.cols());
  return -(b_.transpose() * (*p(t) * z));
}

ObserverCertificate validate_observer_gain(const model::Plant& plant, const Matrix& l) {
  if (l.rows() != plant.n() || l.cols() != plant.p()) {
    throw Error(ErrorKind::DimensionMismatch, "L must be n x p");
  }
  linalg::require_finite(l, "L");
  if (!model::observable(plant)) throw Error(ErrorKind::NotObservable, "(A, C) is not observable");
  const Matrix f = plant.a() - l * plant.c();
  ObserverCertificate cert;
  cert.L = l;
  cert.hurwitzMargin = -linalg::max_real_part(f);
  if (!(cert.hurwitzMargin > 0.0)) {
    throw Error(ErrorKind::NotHurwitz, "A - LC has an eigenvalue with nonnegative real part");
  }
  const Matrix eye = Matrix::Identity(f.rows(), f.cols());
  cert.Q = linalg::solve_lyapunov(f.transpose(), -eye);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(cert.Q, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw Error(ErrorKind::NotPositiveDefinite, "observer Lyapunov matrix is not positive definite");
  }
  cert.rho = 1.0 / eig.eigenvalues().maxCoeff();
  return cert;
}

Vector observer_rhs(const model::Plant& plant, const Matrix& l, const Vector& xi,
                    const Vector& y) {
  return plant.a() * xi + l * (y - plant.c() * xi);
}

Matrix place_repeated_observer_pole(const model::Plant& plant, double pole) {
  const int n = plant.n();
  const Matrix at = plant.a().transpose();
  const Matrix eye = Matrix::Identity(n, n);
  for (int row = 0; row < plant.p(); ++row) {
    const Matrix ci = plant.c().row(row).transpose();
    const Matrix ctrb = linalg::controllability_matrix(at, ci);
    if (linalg::numeric_rank(ctrb) != n) continue;
    // Ackermann: k = e_n^T ctrb^{-1} (A^T - pole I)^n.
    Matrix poly = eye;
    for (int i = 0; i < n; ++i) poly = poly * (at - pole * eye);
    const Matrix en = Vector::Unit(n, n - 1).transpose();
    const Matrix k = en * ctrb.fullPivLu().solve(poly);
    Matrix l = Matrix::Zero(n, plant.p());
    l.col(row) = k.transpose();
    return l;
  }
  throw Error(ErrorKind::NotObservable, "no single output observes A");
}

}  // namespace lowgain::control
