#include "lowgain/ple.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace lowgain::ple {

namespace {

namespace bmp = boost::multiprecision;
using Real = bmp::number<bmp::cpp_bin_float<100>, bmp::et_off>;
using RMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

RMat to_real(const Matrix& m) { return m.cast<Real>(); }

Matrix to_double(const RMat& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, j) = m(i, j).convert_to<double>();
  }
  return out;
}

double lambda_max_sym(const Matrix& m) {
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(linalg::symmetrize(m),
                                                     Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

double operator_norm_sym(const Matrix& m) {
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(linalg::symmetrize(m),
                                                     Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

struct Work {
  RMat w;
  RMat dw;
  RMat p;
  RMat dp;
  Eigen::LLT<RMat> llt;
};

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> grid;
  if (count <= 1) {
    grid.push_back(hi);
    return grid;
  }
  const double llo = std::log10(lo);
  const double lhi = std::log10(hi);
  grid.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double x = llo + (lhi - llo) * k / (count - 1);
    grid.push_back(std::pow(10.0, x));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

}  // namespace

struct Solver::Impl {
  Matrix a;
  Matrix b;
  int n = 0;
  RMat a_real;
  RMat bbt_real;
  double phi = 0.0;
  std::optional<double> cluster;
  std::optional<int> alpha;
  bool nilpotent = false;
  Route route = Route::Kronecker;
  Real lambda = 0;
  // moments[s] = s! * H_s; W(gamma) = sum_s moments[s] / c^{s+1}, c = gamma + 2 lambda.
  std::vector<RMat> moments;

  Work compute(double gamma) const {
    Work work;
    if (route == Route::RepeatedEigenvalueMoments) {
      const Real c = Real(gamma) + 2 * lambda;
      const Real inv = 1 / c;
      work.w = RMat::Zero(n, n);
      work.dw = RMat::Zero(n, n);
      Real power = inv;  // c^{-(s+1)}
      for (std::size_t s = 0; s < moments.size(); ++s) {
        work.w += moments[s] * power;
        work.dw -= moments[s] * (power * inv * Real(static_cast<int>(s) + 1));
        power *= inv;
      }
    } else {
      RMat f = a_real;
      for (int i = 0; i < n; ++i) f(i, i) += Real(gamma) / 2;
      const linalg::KroneckerLyapunov<Real> op(f);
      work.w = linalg::symmetrize(op.solve(bbt_real));
      work.dw = linalg::symmetrize(op.solve(-work.w));
    }
    work.llt.compute(work.w);
    if (work.llt.info() != Eigen::Success) {
      throw Error(ErrorKind::NotPositiveDefinite, "W(gamma) is not positive definite");
    }
    work.p = linalg::symmetrize(work.llt.solve(RMat::Identity(n, n)));
    work.dp = linalg::symmetrize(RMat(-(work.p * work.dw * work.p)));
    return work;
  }

  void require_gamma(double gamma) const {
    if (!std::isfinite(gamma) || gamma <= -2.0 * phi + 1e-10) {
      throw Error(ErrorKind::GammaTooSmall,
                  "gamma must exceed -2 phi(A) = " + std::to_string(-2.0 * phi));
    }
  }
};

Solver::Solver(const Matrix& a, const Matrix& b, std::optional<Route> route) {
  linalg::require_square(a, "A");
  linalg::require_finite(a, "A");
  linalg::require_finite(b, "B");
  if (b.rows() != a.rows() || b.cols() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "B must be n x m with m >= 1");
  }
  auto impl = std::make_shared<Impl>();
  impl->a = a;
  impl->b = b;
  impl->n = static_cast<int>(a.rows());
  if (linalg::numeric_rank(linalg::controllability_matrix(a, b)) != impl->n) {
    throw Error(ErrorKind::NotControllable, "(A, B) is not controllable");
  }
  impl->a_real = to_real(a);
  impl->bbt_real = to_real(b) * to_real(b).transpose();

  impl->cluster = linalg::repeated_real_eigenvalue(a);
  if (impl->cluster) {
    double lambda = *impl->cluster;
    if (std::abs(lambda) <= 1e-12 * std::max(1.0, a.norm())) lambda = 0.0;
    impl->nilpotent = lambda == 0.0;
    impl->phi = lambda;
    impl->lambda = Real(lambda);
    impl->alpha = linalg::nilpotency_index(a - lambda * Matrix::Identity(a.rows(), a.cols()));
  } else {
    impl->phi = linalg::min_real_part(a);
  }

  impl->route = route.value_or(impl->cluster ? Route::RepeatedEigenvalueMoments
                                             : Route::Kronecker);
  if (impl->route == Route::RepeatedEigenvalueMoments) {
    if (!impl->cluster || !impl->alpha) {
      throw Error(ErrorKind::HypothesisViolated,
                  "moment route needs identical real eigenvalues");
    }
    const int k = *impl->alpha;
    RMat shifted = impl->a_real;
    for (int i = 0; i < impl->n; ++i) shifted(i, i) -= impl->lambda;
    // v[i] = N^i B / i!
    std::vector<RMat> v;
    v.push_back(to_real(b));
    for (int i = 1; i < k; ++i) v.push_back(RMat(shifted * v.back()) / Real(i));
    Real factorial = 1;
    for (int s = 0; s <= 2 * k - 2; ++s) {
      if (s > 0) factorial *= s;
      RMat h = RMat::Zero(impl->n, impl->n);
      for (int i = std::max(0, s - k + 1); i <= std::min(s, k - 1); ++i) {
        h += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(s - i)].transpose();
      }
      if (s % 2 == 1) h = -h;
      impl->moments.push_back(linalg::symmetrize(RMat(h * factorial)));
    }
  }
  impl_ = std::move(impl);
}

const Matrix& Solver::a() const { return impl_->a; }
const Matrix& Solver::b() const { return impl_->b; }
int Solver::n() const { return impl_->n; }
Route Solver::route() const { return impl_->route; }
double Solver::phi() const { return impl_->phi; }
double Solver::gamma_threshold() const { return -2.0 * impl_->phi; }
bool Solver::identical_eigenvalues() const { return impl_->cluster.has_value(); }
bool Solver::nilpotent() const { return impl_->nilpotent; }
std::optional<int> Solver::jordan_index() const { return impl_->alpha; }
double Solver::pi(double gamma) const { return 2.0 * impl_->a.trace() + impl_->n * gamma; }

Solution Solver::solve(double gamma) const {
  impl_->require_gamma(gamma);
  const Work work = impl_->compute(gamma);
  Solution sol;
  sol.gamma = gamma;
  sol.W = to_double(work.w);
  sol.P = to_double(work.p);
  sol.dPdGamma = to_double(work.dp);
  const Matrix& a = impl_->a;
  const Matrix& b = impl_->b;
  const Matrix pb = sol.P * b;
  sol.residual =
      (a.transpose() * sol.P + sol.P * a - pb * pb.transpose() + gamma * sol.P).norm();
  sol.conditionEstimate = (work.w.norm() * work.p.norm()).convert_to<double>();
  sol.illConditioned = sol.conditionEstimate > kIllConditionedThreshold;
  return sol;
}

Matrix Solver::derivative(double gamma) const {
  impl_->require_gamma(gamma);
  return to_double(impl_->compute(gamma).dp);
}

double Solver::delta_c_at(double gamma) const {
  impl_->require_gamma(gamma);
  const Work work = impl_->compute(gamma);
  const RMat u = -work.dw;
  const auto lower = work.llt.matrixL();
  const RMat y = lower.solve(u);
  const RMat m = lower.solve(RMat(y.transpose()));
  return pi(gamma) * lambda_max_sym(to_double(m));
}

double Solver::similarity_trace(double gamma) const {
  impl_->require_gamma(gamma);
  const Work work = impl_->compute(gamma);
  const RMat pa = work.p * impl_->a_real;
  const RMat wat = work.w * impl_->a_real.transpose();
  return (pa * wat).trace().convert_to<double>();
}

double Solver::input_trace(double gamma) const {
  impl_->require_gamma(gamma);
  const Work work = impl_->compute(gamma);
  const RMat b = to_real(impl_->b);
  return RMat(b.transpose() * work.p * b).trace().convert_to<double>();
}

double Solver::p_min_eigenvalue(double gamma) const {
  const Solution sol = solve(gamma);
  return 1.0 / lambda_max_sym(sol.W);
}

Solution solve_ple(const Matrix& a, const Matrix& b, double gamma) {
  return Solver(a, b).solve(gamma);
}

Matrix ple_derivative(const Matrix& a, const Matrix& b, double gamma, const Solution& solution) {
  if (solution.gamma != gamma) {
    throw Error(ErrorKind::InvalidArgument, "solution was computed for a different gamma");
  }
  return Solver(a, b).derivative(gamma);
}

std::vector<double> default_delta_c_grid(const Solver& solver, int points_per_decade) {
  const double scale = std::max(1.0, solver.a().norm());
  const int count = 7 * points_per_decade + 1;
  std::vector<double> grid = log_grid(1e-4 * scale, 1e3 * scale, count);
  for (double& g : grid) g += solver.gamma_threshold();
  return grid;
}

DeltaCEstimate estimate_delta_c(const Solver& solver, std::span<const double> grid,
                                const DeltaCOptions& options) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "delta_c grid is empty");
  if (options.requireIdenticalEigenvalues && !solver.identical_eigenvalues()) {
    throw Error(ErrorKind::HypothesisViolated,
                "delta_c is only finite when all eigenvalues of A are identical and real");
  }
  DeltaCEstimate est;
  est.grid.assign(grid.begin(), grid.end());
  est.samples.reserve(grid.size());
  for (double g : grid) est.samples.push_back(solver.delta_c_at(g));

  const auto best_it = std::max_element(est.samples.begin(), est.samples.end());
  const auto best = static_cast<std::size_t>(best_it - est.samples.begin());
  est.value = *best_it;
  est.argmaxGamma = est.grid[best];

  const std::size_t count = est.samples.size();
  if (count >= 3) {
    const double interior =
        *std::max_element(est.samples.begin() + 1, est.samples.end() - 1);
    const double lower = est.samples.front();
    const double upper = est.samples.back();
    const double limit = interior * (1.0 + 1e-6);
    if (lower > limit && lower >= upper) {
      est.edge = GridEdge::Lower;
      est.bounded = false;
    } else if (upper > limit) {
      est.edge = GridEdge::Upper;
      est.bounded = false;
    }
  }

  if (best > 0 && best + 1 < count && options.refinementIterations > 0) {
    // Golden-section search for the maximum in log(gamma).
    const double shift = solver.gamma_threshold();
    auto eval = [&](double x) { return solver.delta_c_at(shift + std::exp(x)); };
    double lo = std::log(est.grid[best - 1] - shift);
    double hi = std::log(est.grid[best + 1] - shift);
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = eval(x1);
    double f2 = eval(x2);
    for (int it = 0; it < options.refinementIterations; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + ratio * (hi - lo);
        f2 = eval(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - ratio * (hi - lo);
        f1 = eval(x1);
      }
    }
    const double refined = std::max(f1, f2);
    if (refined > est.value) {
      est.value = refined;
      est.argmaxGamma = shift + std::exp(f1 >= f2 ? x1 : x2);
    }
  }
  return est;
}

DeltaCEstimate estimate_delta_c(const Matrix& a, const Matrix& b, std::span<const double> grid,
                                const DeltaCOptions& options) {
  return estimate_delta_c(Solver(a, b), grid, options);
}

MuBounds estimate_mu_bounds(const Solver& solver, double gamma0, int grid_size) {
  if (!solver.nilpotent()) {
    throw Error(ErrorKind::HypothesisViolated, "mu bounds require a nilpotent A");
  }
  if (!(gamma0 > 0.0) || grid_size < 1) {
    throw Error(ErrorKind::InvalidArgument, "mu bounds need gamma0 > 0 and grid_size >= 1");
  }
  MuBounds mu;
  mu.delta = 2 * solver.jordan_index().value_or(1) - 1;
  mu.grid = log_grid(1e-4 * gamma0, gamma0, grid_size);
  mu.mu1 = std::numeric_limits<double>::infinity();
  mu.mu2 = 0.0;
  for (double g : mu.grid) {
    const Solution sol = solver.solve(g);
    const double p_max = lambda_max_sym(sol.P);
    const double p_min = 1.0 / lambda_max_sym(sol.W);
    mu.mu2 = std::max(mu.mu2, p_max / g);
    mu.mu1 = std::min(mu.mu1, p_min / std::pow(g, mu.delta));
  }
  return mu;
}

MuBounds estimate_mu_bounds(const Matrix& a, const Matrix& b, double gamma0, int grid_size) {
  return estimate_mu_bounds(Solver(a, b), gamma0, grid_size);
}

std::vector<Margin> check_ple_properties(const Solver& solver, double gamma,
                                         const PropertyOptions& options) {
  const Solution sol = solver.solve(gamma);
  const Matrix& a = solver.a();
  const Matrix& b = solver.b();
  const Matrix& p = sol.P;
  const Matrix& dp = sol.dPdGamma;
  const double n = solver.n();
  const Matrix eye = Matrix::Identity(a.rows(), a.cols());
  const double trace_bpb = solver.input_trace(gamma);
  const double pi = solver.pi(gamma);

  std::vector<Margin> margins;
  margins.push_back({"pi-identity", -std::abs(trace_bpb - pi), std::max(1.0, std::abs(pi))});
  {
    const double ta = a.trace();
    const double bound = (n - 1.0) / (2.0 * n) * pi * pi + 2.0 / n * ta * ta - (a * a).trace();
    margins.push_back(
        {"plePP6", bound - solver.similarity_trace(gamma), std::max(1.0, pi * pi)});
  }
  if (!solver.nilpotent()) return margins;

  const double p_norm = operator_norm_sym(p);
  const double dp_norm = operator_norm_sym(dp);
  const Matrix pb = p * b;
  const Matrix dpb = dp * b;

  margins.push_back({"pleP1", -std::abs(n * gamma - trace_bpb), std::max(1.0, n * gamma)});
  margins.push_back({"pleP2", linalg::definiteness_margin(n * gamma * p - pb * pb.transpose()),
                     std::max(1.0, n * gamma * p_norm)});
  margins.push_back(
      {"pleP3",
       linalg::definiteness_margin(3.0 * n * n * gamma * gamma * p - a.transpose() * p * a),
       std::max(1.0, 3.0 * n * n * gamma * gamma * p_norm)});
  margins.push_back({"pleP4", linalg::definiteness_margin(n * dp - dpb * dpb.transpose()),
                     std::max(1.0, n * dp_norm)});
  margins.push_back({"pleP5-lower", linalg::definiteness_margin(dp - p / (n * gamma)),
                     std::max(1.0, dp_norm)});

  const double delta_c =
      options.deltaC ? *options.deltaC
                     : estimate_delta_c(solver, default_delta_c_grid(solver)).value;
  margins.push_back({"pleP5-upper", linalg::definiteness_margin(delta_c * p / (n * gamma) - dp),
                     std::max(1.0, delta_c * p_norm / (n * gamma))});

  const MuBounds mu = options.mu ? *options.mu : estimate_mu_bounds(solver, gamma, 25);
  const double lower = mu.mu1 * std::pow(gamma, mu.delta);
  margins.push_back({"pleP6-lower", linalg::definiteness_margin(p - lower * eye),
                     std::max(1.0, p_norm)});
  margins.push_back({"pleP6-upper", linalg::definiteness_margin(mu.mu2 * gamma * eye - p),
                     std::max(1.0, mu.mu2 * gamma)});
  return margins;
}

std::vector<Margin> check_ple_properties(const Matrix& a, const Matrix& b, double gamma,
                                         const PropertyOptions& options) {
  return check_ple_properties(Solver(a, b), gamma, options);
}

bool Diagnostics::all_hold(double tol) const {
  return std::all_of(propertyMargins.begin(), propertyMargins.end(),
                     [tol](const Margin& m) { return m.holds(tol); });
}

Diagnostics diagnose(const Solver& solver, double gamma) {
  Diagnostics d;
  d.gamma = gamma;
  d.n = solver.n();
  d.traceA = solver.a().trace();
  d.alphaA = solver.jordan_index().value_or(1);
  d.delta = 2 * d.alphaA - 1;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  d.deltaC = nan;
  d.mu1 = nan;
  d.mu2 = nan;
  PropertyOptions options;
  if (solver.identical_eigenvalues()) {
    const DeltaCEstimate est = estimate_delta_c(solver, default_delta_c_grid(solver));
    d.deltaC = est.value;
    d.deltaCBounded = est.bounded;
    options.deltaC = est.value;
  }
  if (solver.nilpotent()) {
    const MuBounds mu = estimate_mu_bounds(solver, gamma, 25);
    d.mu1 = mu.mu1;
    d.mu2 = mu.mu2;
    d.delta = mu.delta;
    options.mu = mu;
  }
  d.propertyMargins = check_ple_properties(solver, gamma, options);
  return d;
}

}  // namespace lowgain::ple
