#pragma once

#include <complex>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lowgain/errors.hpp"

// Dense real matrix kernel used by the PLE solver, the certificates and the
// simulator. Everything here is pure; matrices are passed by const reference.
namespace lowgain::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

void require_finite(const Matrix& m, std::string_view what);
void require_square(const Matrix& m, std::string_view what);

[[nodiscard]] bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);

template <typename Derived>
[[nodiscard]] auto symmetrize(const Eigen::MatrixBase<Derived>& m) {
  using Plain = typename Derived::PlainObject;
  Plain out = m;
  Plain t = out.transpose();
  out = (out + t) / typename Derived::Scalar(2);
  return out;
}

/// Solves F X + X F^T = R by Kronecker vectorization,
///   (I (x) F + F (x) I) vec(X) = vec(R),
/// factored once with partial-pivot LU so several right-hand sides can share
/// the factorization. Templated on the scalar so the PLE solver can run the
/// same code in extended precision.
template <typename Scalar>
class KroneckerLyapunov {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit KroneckerLyapunov(const Mat& f) : n_(f.rows()) {
    const Eigen::Index n = n_;
    Mat op = Mat::Zero(n * n, n * n);
    // Column-major vec: X(i, j) lives at i + j * n.
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index row = i + j * n;
        for (Eigen::Index k = 0; k < n; ++k) {
          op(row, k + j * n) += f(i, k);  // (F X)(i, j)
          op(row, i + k * n) += f(j, k);  // (X F^T)(i, j)
        }
      }
    }
    lu_.compute(op);
    const auto diag = lu_.matrixLU().diagonal().cwiseAbs();
    using std::abs;
    const Scalar largest = diag.maxCoeff();
    const Scalar smallest = diag.minCoeff();
    const Scalar eps = Eigen::NumTraits<Scalar>::epsilon();
    if (!(largest > Scalar(0)) || smallest <= eps * Scalar(double(n * n)) * largest) {
      throw Error(ErrorKind::SingularLyapunov,
                  "Lyapunov operator is numerically singular");
    }
  }

  [[nodiscard]] Mat solve(const Mat& r) const {
    const Eigen::Index n = n_;
    Mat rhs = Eigen::Map<const Mat>(r.data(), n * n, 1);
    Mat sol = lu_.solve(rhs);
    return Eigen::Map<const Mat>(sol.data(), n, n);
  }

  [[nodiscard]] Eigen::Index size() const noexcept { return n_; }

 private:
  Eigen::Index n_;
  Eigen::PartialPivLU<Mat> lu_;
};

/// F X + X F^T = R. Rejects F whose spectrum has a pair summing to ~0.
/// Symmetric R yields a symmetrized X.
[[nodiscard]] Matrix solve_lyapunov(const Matrix& f, const Matrix& r);

/// Eigenvalues with multiplicity, sorted by real part (then imaginary part).
/// A matrix that passes the repeated-real-eigenvalue test returns the exact
/// cluster value n times instead of the perturbed QR output.
[[nodiscard]] std::vector<std::complex<double>> spectrum(const Matrix& m);

/// Diagonal similarity scaling (powers of two) that equalizes row and column
/// norms; eigenvalues are unchanged.
[[nodiscard]] Matrix balance(const Matrix& m);

/// Smallest eigenvalue of (M + M^T) / 2.
[[nodiscard]] double definiteness_margin(const Matrix& m);

/// Symmetric S with S M S = I for symmetric positive definite M.
[[nodiscard]] Matrix pd_inverse_sqrt(const Matrix& m);

/// Number of singular values above tol * sigma_max.
[[nodiscard]] int numeric_rank(const Matrix& m, double tol = 1e-9);

[[nodiscard]] Matrix controllability_matrix(const Matrix& a, const Matrix& b);
[[nodiscard]] Matrix observability_matrix(const Matrix& a, const Matrix& c);

/// Smallest k with ||N^k|| <= 1e-10 * n * ||N||^k (Frobenius), i.e. the
/// largest Jordan block size of a nilpotent N. Empty if no k <= n qualifies.
[[nodiscard]] std::optional<int> nilpotency_index(const Matrix& n);

/// If every eigenvalue of M equals tr(M)/n (M - tr(M)/n I nilpotent), that
/// common value.
[[nodiscard]] std::optional<double> repeated_real_eigenvalue(const Matrix& m);

/// min Re(lambda_i(M)); exact for repeated-eigenvalue matrices.
[[nodiscard]] double min_real_part(const Matrix& m);
/// max Re(lambda_i(M)); exact for repeated-eigenvalue matrices.
[[nodiscard]] double max_real_part(const Matrix& m);

}  // namespace lowgain::linalg
