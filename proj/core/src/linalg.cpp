#include "lowgain/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace lowgain {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SingularLyapunov: return "SingularLyapunov";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::GammaTooSmall: return "GammaTooSmall";
    case ErrorKind::NotControllable: return "NotControllable";
    case ErrorKind::NotObservable: return "NotObservable";
    case ErrorKind::NotHurwitz: return "NotHurwitz";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::NegativeTime: return "NegativeTime";
    case ErrorKind::InvalidDimension: return "InvalidDimension";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ChannelOutOfRange: return "ChannelOutOfRange";
    case ErrorKind::InvalidDelayProfile: return "InvalidDelayProfile";
    case ErrorKind::InsufficientHistory: return "InsufficientHistory";
    case ErrorKind::ConfigParse: return "ConfigParse";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace lowgain

namespace lowgain::linalg {

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::NonFinite, std::string(what) + " contains NaN or Inf");
  }
}

void require_square(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + " must be a non-empty square matrix");
  }
}

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = m.cwiseAbs().maxCoeff();
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Matrix solve_lyapunov(const Matrix& f, const Matrix& r) {
  require_square(f, "F");
  require_finite(f, "F");
  require_finite(r, "R");
  if (r.rows() != f.rows() || r.cols() != f.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "R must match the shape of F");
  }

  const auto eig = spectrum(f);
  double scale = 1.0;
  for (const auto& l : eig) scale = std::max(scale, std::abs(l));
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < eig.size(); ++i) {
    for (std::size_t j = i; j < eig.size(); ++j) {
      closest = std::min(closest, std::abs(eig[i] + eig[j]));
    }
  }
  if (closest < 1e-10 * scale) {
    throw Error(ErrorKind::SingularLyapunov,
                "F has eigenvalues lambda_i + lambda_j = 0; no unique solution");
  }

  const KroneckerLyapunov<double> op(f);
  Matrix x = op.solve(r);
  // One step of iterative refinement.
  const Matrix residual = r - (f * x + x * f.transpose());
  x += op.solve(residual);

  if (is_symmetric(r)) x = symmetrize(x);
  return x;
}

Matrix balance(const Matrix& m) {
  constexpr double radix = 2.0;
  constexpr double radix_sq = radix * radix;
  Matrix b = m;
  const Eigen::Index n = b.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(b(j, i));
        r += std::abs(b(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      double g = r / radix;
      while (c < g) {
        f *= radix;
        c *= radix_sq;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix_sq;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        b.row(i) /= f;
        b.col(i) *= f;
      }
    }
  }
  return b;
}

std::vector<std::complex<double>> spectrum(const Matrix& m) {
  require_square(m, "M");
  require_finite(m, "M");
  const auto n = static_cast<std::size_t>(m.rows());
  std::vector<std::complex<double>> out;
  out.reserve(n);
  if (const auto cluster = repeated_real_eigenvalue(m)) {
    out.assign(n, {*cluster, 0.0});
    return out;
  }
  const Eigen::EigenSolver<Matrix> solver(balance(m), /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NonFinite, "eigenvalue iteration failed to converge");
  }
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    out.push_back(solver.eigenvalues()(i));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

double definiteness_margin(const Matrix& m) {
  require_square(m, "M");
  require_finite(m, "M");
  const Matrix s = symmetrize(m);
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Matrix pd_inverse_sqrt(const Matrix& m) {
  require_square(m, "M");
  require_finite(m, "M");
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(m));
  const Vector& values = solver.eigenvalues();
  if (!(values.minCoeff() > 0.0)) {
    throw Error(ErrorKind::NotPositiveDefinite, "matrix is not positive definite");
  }
  const Matrix& vectors = solver.eigenvectors();
  const Vector inv_sqrt = values.cwiseSqrt().cwiseInverse();
  return symmetrize(vectors * inv_sqrt.asDiagonal() * vectors.transpose());
}

int numeric_rank(const Matrix& m, double tol) {
  require_finite(m, "M");
  if (m.size() == 0) return 0;
  const Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * sv(0)) ++rank;
  }
  return rank;
}

Matrix controllability_matrix(const Matrix& a, const Matrix& b) {
  require_square(a, "A");
  if (b.rows() != a.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "B must have as many rows as A");
  }
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  Matrix ctrb(n, n * m);
  Matrix block = b;
  for (Eigen::Index k = 0; k < n; ++k) {
    ctrb.middleCols(k * m, m) = block;
    block = a * block;
  }
  return ctrb;
}

Matrix observability_matrix(const Matrix& a, const Matrix& c) {
  if (c.cols() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "C must have as many columns as A");
  }
  return controllability_matrix(a.transpose(), c.transpose()).transpose();
}

std::optional<int> nilpotency_index(const Matrix& n_mat) {
  require_square(n_mat, "N");
  require_finite(n_mat, "N");
  const auto n = static_cast<int>(n_mat.rows());
  const double norm = n_mat.norm();
  if (norm == 0.0) return 1;
  Matrix power = n_mat;
  double norm_power = norm;
  for (int k = 1; k <= n; ++k) {
    if (power.norm() <= 1e-10 * n * norm_power) return k;
    power = power * n_mat;
    norm_power *= norm;
  }
  return std::nullopt;
}

std::optional<double> repeated_real_eigenvalue(const Matrix& m) {
  require_square(m, "M");
  const double lambda = m.trace() / static_cast<double>(m.rows());
  const Matrix shifted = m - lambda * Matrix::Identity(m.rows(), m.cols());
  if (nilpotency_index(shifted)) return lambda;
  return std::nullopt;
}

double min_real_part(const Matrix& m) {
  const auto eig = spectrum(m);
  return eig.front().real();
}

double max_real_part(const Matrix& m) {
  const auto eig = spectrum(m);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& l : eig) best = std::max(best, l.real());
  return best;
}

}  // namespace lowgain::linalg
