#include "lowgain/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/SVD>

namespace lowgain::cli {

namespace {

Matrix unimodular(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> index(0, n - 1);
  std::uniform_int_distribution<int> sign(0, 1);
  for (;;) {
    Matrix t = Matrix::Identity(n, n);
    // Row operations r_i += +-r_j keep the determinant at 1; a final row swap
    // flips it to -1 half the time.
    for (int k = 0; k < 3 * n; ++k) {
      const int i = index(rng);
      const int j = index(rng);
      if (i == j) continue;
      const Matrix candidate = [&] {
        Matrix c = t;
        c.row(i) += (sign(rng) ? 1.0 : -1.0) * t.row(j);
        return c;
      }();
      if (candidate.cwiseAbs().maxCoeff() <= 2.0) t = candidate;
    }
    if (n > 1 && sign(rng)) t.row(0).swap(t.row(n - 1));
    const Eigen::JacobiSVD<Matrix> svd(t);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) > 0.0 && sv(0) / sv(sv.size() - 1) <= 1e3) return t;
  }
}

}  // namespace

RandomPair random_nilpotent_pair(std::mt19937_64& rng, int n, bool single_block) {
  if (n < 1) throw Error(ErrorKind::InvalidDimension, "n must be at least 1");
  RandomPair pair;
  if (single_block) {
    pair.blocks = {n};
  } else {
    std::uniform_int_distribution<int> size(1, n);
    int left = n;
    while (left > 0) {
      const int b = std::min(left, size(rng));
      pair.blocks.push_back(b);
      left -= b;
    }
  }
  Matrix j = Matrix::Zero(n, n);
  int offset = 0;
  for (int b : pair.blocks) {
    for (int k = 0; k + 1 < b; ++k) j(offset + k, offset + k + 1) = 1.0;
    offset += b;
  }
  const Matrix t = unimodular(rng, n);
  const Matrix t_inv = t.fullPivLu().inverse().array().round().matrix();
  pair.A = t * j * t_inv;

  const int m = static_cast<int>(pair.blocks.size());
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  do {
    pair.B = Matrix::NullaryExpr(n, m, [&] { return entry(rng); });
  } while (linalg::numeric_rank(linalg::controllability_matrix(pair.A, pair.B)) != n);
  return pair;
}

CampaignReport property_campaign(std::uint64_t seed, int count, int n_max,
                                 const CampaignOptions& options) {
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "count must be at least 1");
  if (n_max < 1 || n_max > 8) throw Error(ErrorKind::InvalidArgument, "nMax must lie in [1, 8]");
  CampaignReport report;
  report.seed = seed;
  report.count = count;
  report.nMax = n_max;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(1, n_max);
  const double gamma0 = options.gammaHi;
  const int grid = options.gammaCount;

  for (int p = 0; p < count; ++p) {
    const int n = dim(rng);
    const RandomPair pair = random_nilpotent_pair(rng, n, options.singleBlockOnly);
    report.dimensions.push_back(n);
    const ple::Solver solver(pair.A, pair.B);
    ple::PropertyOptions props;
    props.deltaC = ple::estimate_delta_c(solver, ple::default_delta_c_grid(solver)).value;
    // Grid [1e-4 gamma0, gamma0] with gamma0 = gammaHi.
    props.mu = ple::estimate_mu_bounds(solver, gamma0, grid);
    if (report.gammas.empty()) report.gammas = props.mu->grid;

    for (double g : props.mu->grid) {
      for (const ple::Margin& m : ple::check_ple_properties(solver, g, props)) {
        auto it = report.worst.find(m.name);
        if (it == report.worst.end() || m.normalized() < it->second.normalized) {
          report.worst[m.name] = {m.normalized(), m.value, m.scale, p, g};
        }
      }
      const double h = 1e-5 * g;
      const Matrix fd = (solver.solve(g + h).P - solver.solve(g - h).P) / (2.0 * h);
      const Matrix dp = solver.derivative(g);
      report.worstDerivativeError =
          std::max(report.worstDerivativeError, (fd - dp).norm() / dp.norm());
    }
  }
  report.pass = report.worstDerivativeError <= options.fdTolerance;
  for (const auto& [name, w] : report.worst) {
    if (w.normalized < -options.tolerance) report.pass = false;
  }
  return report;
}

std::string CampaignReport::summary() const {
  std::ostringstream out;
  out << "seed " << seed << ", " << count << " pairs, n <= " << nMax << ", " << gammas.size()
      << " gammas in [" << (gammas.empty() ? 0.0 : gammas.front()) << ", "
      << (gammas.empty() ? 0.0 : gammas.back()) << "]\n";
  out << "property       worst margin/scale   pair  gamma\n";
  for (const auto& [name, w] : worst) {
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %-20.6g %-5d %.4g\n", name.c_str(), w.normalized,
                  w.pair, w.gamma);
    out << line;
  }
  char line[120];
  std::snprintf(line, sizeof line, "dP/dgamma vs finite difference: %.3g\n",
                worstDerivativeError);
  out << line << (pass ? "all properties hold" : "some property failed") << "\n";
  return out.str();
}

}  // namespace lowgain::cli
