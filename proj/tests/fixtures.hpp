#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "lowgain/model.hpp"

namespace fixtures {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A = [[0, 1], [0, alpha]], B = [0, 1]^T.
inline Matrix example1_a(double alpha) {
  Matrix a(2, 2);
  a << 0, 1, 0, alpha;
  return a;
}

inline Matrix example1_b() {
  Matrix b(2, 1);
  b << 0, 1;
  return b;
}

inline Matrix example1_p(double alpha, double g) {
  const double s = g + alpha;
  Matrix p(2, 2);
  p << g * s * s, g * s, g * s, 2 * s;
  return p;
}

inline Matrix example1_dp(double alpha, double g) {
  Matrix p(2, 2);
  p << (3 * g + alpha) * (g + alpha), 2 * g + alpha, 2 * g + alpha, 2;
  return p;
}

inline Matrix bench_a() {
  Matrix a(4, 4);
  a << 0, 1, 2, -1,
       0, 0, -4, 2,
       1, 1, 2, -1,
       2, 2, 4, -2;
  return a;
}

inline Matrix bench_b1() {
  Matrix b(4, 2);
  b << 0, 0, -1, 1, 0, 0, 0, -1;
  return b;
}

inline Matrix bench_b2() {
  Matrix b(4, 2);
  b << 0, 0, 2, -2, 0, 0, 0, 2;
  return b;
}

inline Matrix bench_c() {
  Matrix c(2, 4);
  c << 0, 0, 1, 0, 1, 0, 0, 0;
  return c;
}

inline Matrix bench_l() {
  Matrix l(4, 2);
  l << 1.5, 1.5, 1.75, 1.75, 2.5, 1.5, 5.25, 3.25;
  return l;
}

inline lowgain::model::Plant bench_plant() {
  return lowgain::model::Plant(bench_a(), {bench_b1(), bench_b2()}, bench_c());
}

// Printed closed-form gain of the benchmark plant, typed term by term.
inline Matrix printed_k(double g) {
  auto p = [g](int e) { return std::pow(g, e); };
  const double k0 = 25 * p(6) + 80 * p(5) + 148 * p(4) + 128 * p(3) + 96 * p(2) + 64;
  const double k11 = p(4) * (-5 * p(5) + 3 * p(4) + 24 * p(3) + 100 * p(2) + 160 * g + 176);
  const double k12 = p(3) * (35 * p(4) + 144 * p(3) + 312 * p(2) + 352 * g + 224);
  const double k13 = p(2) * (-5 * p(7) - 12 * p(6) - 2 * p(5) + 164 * p(4) + 512 * p(3) +
                             848 * p(2) + 704 * g + 384);
  const double k14 = p(2) * (15 * p(5) + 106 * p(4) + 280 * p(3) + 424 * p(2) + 352 * g + 192);
  const double k21 = 2 * p(3) * (5 * p(6) - 3 * p(5) - 20 * p(4) - 44 * p(3) + 4 * p(2) + 64);
  const double k22 = 2 * p(2) * (-10 * p(5) - 19 * p(4) - 16 * p(3) + 36 * p(2) + 64 * g + 96);
  const double k23 = 2 * g * (5 * p(8) + 12 * p(7) + 61 * p(6) + 138 * p(5) + 248 * p(4) +
                              216 * p(3) + 288 * p(2) + 192 * g + 256);
  const double k24 = g * (45 * p(6) + 138 * p(5) + 248 * p(4) + 232 * p(3) + 288 * p(2) +
                          192 * g + 256);
  Matrix k(2, 4);
  k << k11, k12, -k13, k14, k21, k22, -k23, k24;
  return k / k0;
}

inline double max_rel(const Matrix& got, const Matrix& want) {
  return (got - want).cwiseAbs().maxCoeff() / std::max(1e-300, want.cwiseAbs().maxCoeff());
}

}  // namespace fixtures
