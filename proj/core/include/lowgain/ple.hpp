#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lowgain/linalg.hpp"

// Parametric Lyapunov equation
//
//   A^T P + P A - P B B^T P = -gamma P,
//
// solved through its linear dual (A + gamma/2 I) W + W (A + gamma/2 I)^T = B B^T
// with P = W^{-1}. For matrices whose eigenvalues are all equal W(gamma) is a
// finite sum of moment matrices, W = sum_s s! H_s / (gamma + 2 lambda)^{s+1};
// otherwise the Kronecker route is used. Both routes run in 100-digit binary
// floating point internally: W becomes ill-conditioned like gamma^{-2(alpha-1)}
// as gamma -> 0 and double precision loses every digit of P around gamma ~ 1e-2
// for a 4x4 nilpotent A with a single Jordan block. Results are rounded to
// double at the API boundary.
namespace lowgain::ple {

using linalg::Matrix;

enum class Route {
  RepeatedEigenvalueMoments,
  Kronecker,
};

struct Solution {
  double gamma = 0.0;
  Matrix W;
  Matrix P;
  Matrix dPdGamma;
  /// Frobenius norm of A^T P + P A - P B B^T P + gamma P, from the returned P.
  double residual = 0.0;
  /// ||W||_F * ||P||_F, an upper bound on the 2-norm condition number of W.
  double conditionEstimate = 0.0;
  /// conditionEstimate > 1e12. Informational; the solution is still returned.
  bool illConditioned = false;
};

inline constexpr double kIllConditionedThreshold = 1e12;

/// Reusable PLE solver for a fixed pair (A, B). Validation, the spectral
/// threshold and the moment matrices are computed once at construction.
/// Copies share immutable state and are safe to use from several threads.
class Solver {
 public:
  /// Throws NotControllable, DimensionMismatch or NonFinite.
  Solver(const Matrix& a, const Matrix& b, std::optional<Route> route = std::nullopt);

  [[nodiscard]] const Matrix& a() const;
  [[nodiscard]] const Matrix& b() const;
  [[nodiscard]] int n() const;
  [[nodiscard]] Route route() const;

  /// phi(A) = min Re lambda_i(A).
  [[nodiscard]] double phi() const;
  /// Solutions exist iff gamma > -2 phi(A).
  [[nodiscard]] double gamma_threshold() const;
  /// All eigenvalues of A equal and real.
  [[nodiscard]] bool identical_eigenvalues() const;
  /// All eigenvalues of A are zero.
  [[nodiscard]] bool nilpotent() const;
  /// alpha(A): largest Jordan block at the (repeated) eigenvalue.
  [[nodiscard]] std::optional<int> jordan_index() const;
  /// pi(gamma) = 2 tr(A) + n gamma.
  [[nodiscard]] double pi(double gamma) const;

  /// Throws GammaTooSmall for gamma <= -2 phi(A) + 1e-10.
  [[nodiscard]] Solution solve(double gamma) const;
  /// dP/dgamma = -P (dW/dgamma) P with (A + gamma/2 I) dW + dW (A + gamma/2 I)^T = -W.
  [[nodiscard]] Matrix derivative(double gamma) const;
  /// delta_c^gamma = pi(gamma) lambda_max(W^{-1/2} U W^{-1/2}), where U solves
  /// (A + gamma/2 I) U + U (A + gamma/2 I)^T = W (so U = -dW/dgamma).
  [[nodiscard]] double delta_c_at(double gamma) const;
  /// tr(P A P^{-1} A^T), evaluated in extended precision.
  [[nodiscard]] double similarity_trace(double gamma) const;
  /// tr(B^T P B), evaluated in extended precision.
  [[nodiscard]] double input_trace(double gamma) const;
  /// lambda_min(P(gamma)) computed as 1 / lambda_max(W(gamma)).
  [[nodiscard]] double p_min_eigenvalue(double gamma) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

[[nodiscard]] Solution solve_ple(const Matrix& a, const Matrix& b, double gamma);

/// dP/dgamma for an existing solution of the same (A, B, gamma). Recomputed
/// from (A, B) in extended precision; the solution's rounded matrices are only
/// used to validate gamma.
[[nodiscard]] Matrix ple_derivative(const Matrix& a, const Matrix& b, double gamma,
                                    const Solution& solution);

enum class GridEdge { Interior, Lower, Upper };

struct DeltaCEstimate {
  double value = 0.0;
  double argmaxGamma = 0.0;
  /// False when the largest sample sits on a grid edge and exceeds every
  /// interior sample by more than 1e-6 relative: the supremum may be infinite.
  bool bounded = true;
  GridEdge edge = GridEdge::Interior;
  std::vector<double> grid;
  std::vector<double> samples;
};

struct DeltaCOptions {
  /// Reject A unless all its eigenvalues are identical and real.
  bool requireIdenticalEigenvalues = true;
  int refinementIterations = 60;
};

/// Log grid gamma = -2 phi(A) + 10^x max(1, ||A||), x in [-4, 3].
[[nodiscard]] std::vector<double> default_delta_c_grid(const Solver& solver,
                                                       int points_per_decade = 8);

/// Maximum of delta_c^gamma over the grid followed by one golden-section
/// refinement (in log gamma) around an interior argmax.
[[nodiscard]] DeltaCEstimate estimate_delta_c(const Solver& solver, std::span<const double> grid,
                                              const DeltaCOptions& options = {});
[[nodiscard]] DeltaCEstimate estimate_delta_c(const Matrix& a, const Matrix& b,
                                              std::span<const double> grid,
                                              const DeltaCOptions& options = {});

struct MuBounds {
  double mu1 = 0.0;
  double mu2 = 0.0;
  /// 2 alpha(A) - 1.
  int delta = 1;
  std::vector<double> grid;
};

/// Over gridSize log-spaced points in [1e-4 gamma0, gamma0]:
/// mu2 = max lambda_max(P)/gamma, mu1 = min lambda_min(P)/gamma^delta.
/// Requires nilpotent A (HypothesisViolated otherwise).
[[nodiscard]] MuBounds estimate_mu_bounds(const Solver& solver, double gamma0, int grid_size);
[[nodiscard]] MuBounds estimate_mu_bounds(const Matrix& a, const Matrix& b, double gamma0,
                                          int grid_size);

/// One inequality check. value >= -tol * scale means the inequality holds.
struct Margin {
  std::string name;
  double value = 0.0;
  double scale = 1.0;

  [[nodiscard]] bool holds(double tol = 1e-8) const { return value >= -tol * scale; }
  [[nodiscard]] double normalized() const { return value / scale; }
};

struct PropertyOptions {
  /// Used by pleP5-upper; estimated on the default grid when absent.
  std::optional<double> deltaC;
  /// Used by pleP6; estimated with gamma0 = gamma when absent.
  std::optional<MuBounds> mu;
};

/// Margins for the PLE inequalities at one gamma. For nilpotent A:
///   pleP1 (-|n gamma - tr(B^T P B)|), pleP2, pleP3, pleP4, pleP5-lower,
///   pleP5-upper, pleP6-lower, pleP6-upper;
/// for every admissible pair: plePP6 and pi-identity (-|tr(B^T P B) - pi|).
[[nodiscard]] std::vector<Margin> check_ple_properties(const Solver& solver, double gamma,
                                                       const PropertyOptions& options = {});
[[nodiscard]] std::vector<Margin> check_ple_properties(const Matrix& a, const Matrix& b,
                                                       double gamma,
                                                       const PropertyOptions& options = {});

struct Diagnostics {
  double gamma = 0.0;
  /// NaN unless A has identical eigenvalues.
  double deltaC = 0.0;
  bool deltaCBounded = true;
  /// NaN unless A is nilpotent.
  double mu1 = 0.0;
  double mu2 = 0.0;
  int delta = 1;
  int alphaA = 1;
  double traceA = 0.0;
  int n = 0;
  std::vector<Margin> propertyMargins;

  [[nodiscard]] double pi(double g) const { return 2.0 * traceA + n * g; }
  [[nodiscard]] bool all_hold(double tol = 1e-8) const;
};

/// Full diagnostics at gamma (delta_c, mu bounds on (0, gamma], margins).
[[nodiscard]] Diagnostics diagnose(const Solver& solver, double gamma);

}  // namespace lowgain::ple
