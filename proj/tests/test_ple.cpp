#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lowgain/campaign.hpp"
#include "lowgain/ple.hpp"

using namespace lowgain;
using linalg::Matrix;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

double margin(const std::vector<ple::Margin>& ms, const std::string& name) {
  for (const auto& m : ms) {
    if (m.name == name) return m.value;
  }
  ADD_FAILURE() << "missing margin " << name;
  return 0.0;
}

}  // namespace

class Example1 : public ::testing::TestWithParam<std::tuple<double, double>> {};

TEST_P(Example1, ClosedFormP) {
  const auto [alpha, g] = GetParam();
  const auto sol = ple::solve_ple(fixtures::example1_a(alpha), fixtures::example1_b(), g);
  EXPECT_LT(fixtures::max_rel(sol.P, fixtures::example1_p(alpha, g)), 1e-12);
  EXPECT_LT(fixtures::max_rel(sol.dPdGamma, fixtures::example1_dp(alpha, g)), 1e-12);
  EXPECT_LT(sol.residual, 1e-12 * sol.P.norm() * sol.P.norm());
  EXPECT_LT((sol.W * sol.P - Matrix::Identity(2, 2)).norm(), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(AlphaGamma, Example1,
                         ::testing::Combine(::testing::Values(0.0, 0.5),
                                            ::testing::Values(0.5, 1.0, 2.0)));

TEST(SolvePle, ExactValues) {
  const auto s1 = ple::solve_ple(fixtures::example1_a(0), fixtures::example1_b(), 1.0);
  Matrix p1(2, 2);
  p1 << 1, 1, 1, 2;
  EXPECT_LT((s1.P - p1).norm(), 1e-14);
  Matrix dp(2, 2);
  dp << 3, 2, 2, 2;
  EXPECT_LT((s1.dPdGamma - dp).norm(), 1e-14);

  const auto s2 = ple::solve_ple(fixtures::example1_a(0), fixtures::example1_b(), 2.0);
  Matrix p2(2, 2);
  p2 << 8, 4, 4, 4;
  EXPECT_LT((s2.P - p2).norm(), 1e-13);
}

TEST(SolvePle, Scalar) {
  for (double g : {1e-3, 0.3, 1.0, 7.0}) {
    const auto sol = ple::solve_ple(scalar(0), scalar(1), g);
    EXPECT_NEAR(sol.P(0, 0), g, 1e-15 * g);
    EXPECT_NEAR(sol.dPdGamma(0, 0), 1.0, 1e-14);
  }
}

TEST(SolvePle, Errors) {
  try {
    (void)ple::solve_ple(scalar(0), scalar(1), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GammaTooSmall);
  }
  Matrix b(2, 1);
  b << 1, 0;
  try {
    (void)ple::solve_ple(fixtures::example1_a(0), b, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotControllable);
  }
  EXPECT_THROW((void)ple::solve_ple(fixtures::example1_a(0), Matrix::Ones(3, 1), 1.0), Error);
}

TEST(SolvePle, RoutesAgree) {
  const Matrix a = fixtures::bench_a();
  const Matrix b = fixtures::bench_b1() + fixtures::bench_b2();
  const ple::Solver moments(a, b);
  const ple::Solver kron(a, b, ple::Route::Kronecker);
  EXPECT_EQ(moments.route(), ple::Route::RepeatedEigenvalueMoments);
  for (double g : {1e-3, 0.05, 1.0, 10.0}) {
    EXPECT_LT(fixtures::max_rel(kron.solve(g).P, moments.solve(g).P), 1e-12) << g;
  }
}

TEST(SolvePle, SmallGammaVanishes) {
  const ple::Solver s(fixtures::bench_a(), fixtures::bench_b1() + fixtures::bench_b2());
  const auto mu = ple::estimate_mu_bounds(s, 1.0, 25);
  const auto sol = s.solve(1e-6);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sol.P);
  EXPECT_LE(es.eigenvalues().maxCoeff(), mu.mu2 * 1e-6 * (1 + 1e-8));
  EXPECT_TRUE(sol.illConditioned);
}

TEST(PleDerivative, MatchesFiniteDifference) {
  std::mt19937_64 rng(11);
  for (int n : {2, 3, 5}) {
    auto pair = cli::random_nilpotent_pair(rng, n, false);
    for (double g : {0.01, 0.5, 4.0}) {
      const auto sol = ple::solve_ple(pair.A, pair.B, g);
      const Matrix dp = ple::ple_derivative(pair.A, pair.B, g, sol);
      const double h = 1e-5 * g;
      const Matrix fd = (ple::solve_ple(pair.A, pair.B, g + h).P -
                         ple::solve_ple(pair.A, pair.B, g - h).P) /
                        (2 * h);
      EXPECT_LT((fd - dp).norm() / dp.norm(), 1e-5) << n << " " << g;
      EXPECT_GT(linalg::definiteness_margin(dp), 0.0);
    }
  }
}

TEST(DeltaC, Example1Bounded) {
  const ple::Solver s(fixtures::example1_a(0), fixtures::example1_b());
  const auto est = ple::estimate_delta_c(s, ple::default_delta_c_grid(s));
  EXPECT_NEAR(est.value, 2 * (2 + std::sqrt(2.0)), 1e-6);
  EXPECT_TRUE(est.bounded);
  EXPECT_EQ(est.edge, ple::GridEdge::Interior);
}

TEST(DeltaC, ScalarIsOne) {
  const ple::Solver s(scalar(0), scalar(1));
  for (double g : {1e-3, 1.0, 100.0}) EXPECT_NEAR(s.delta_c_at(g), 1.0, 1e-12);
  const auto est = ple::estimate_delta_c(s, ple::default_delta_c_grid(s));
  EXPECT_NEAR(est.value, 1.0, 1e-10);
}

TEST(DeltaC, Example1DistinctEigenvaluesDiverge) {
  const Matrix a = fixtures::example1_a(0.5);
  EXPECT_THROW((void)ple::estimate_delta_c(a, fixtures::example1_b(), std::vector<double>{1.0}),
               Error);
  const ple::Solver s(a, fixtures::example1_b());
  ple::DeltaCOptions opts;
  opts.requireIdenticalEigenvalues = false;
  std::vector<double> grid;
  for (int i = 0; i <= 56; ++i) grid.push_back(std::pow(10.0, -4.0 + i / 8.0));
  const auto est = ple::estimate_delta_c(s, grid, opts);
  EXPECT_FALSE(est.bounded);
  EXPECT_EQ(est.edge, ple::GridEdge::Lower);
  EXPECT_DOUBLE_EQ(est.argmaxGamma, 1e-4);
  // The default grid starts at 1e-4 max(1, ||A||) and flags the same edge.
  EXPECT_FALSE(ple::estimate_delta_c(s, ple::default_delta_c_grid(s), opts).bounded);
}

TEST(MuBounds, Scalar) {
  const auto mu = ple::estimate_mu_bounds(scalar(0), scalar(1), 1.0, 20);
  EXPECT_NEAR(mu.mu1, 1.0, 1e-12);
  EXPECT_NEAR(mu.mu2, 1.0, 1e-12);
  EXPECT_EQ(mu.delta, 1);
}

TEST(MuBounds, Example1) {
  const auto mu = ple::estimate_mu_bounds(fixtures::example1_a(0), fixtures::example1_b(), 1.0, 30);
  EXPECT_EQ(mu.delta, 3);
  EXPECT_NEAR(mu.mu2, (3 + std::sqrt(5.0)) / 2, 1e-10);
  EXPECT_GT(mu.mu1, 0.0);
  EXPECT_THROW((void)ple::estimate_mu_bounds(fixtures::example1_a(0.5), fixtures::example1_b(),
                                             1.0, 10),
               Error);
}

TEST(Properties, Example1TraceIdentity) {
  const auto ms = ple::check_ple_properties(fixtures::example1_a(0), fixtures::example1_b(), 1.0);
  EXPECT_NEAR(margin(ms, "pleP1"), 0.0, 1e-14);
  EXPECT_NEAR(margin(ms, "pi-identity"), 0.0, 1e-14);
  for (const auto& m : ms) EXPECT_TRUE(m.holds()) << m.name << " " << m.normalized();
}

TEST(Properties, ScalarMargins) {
  const auto ms = ple::check_ple_properties(scalar(0), scalar(1), 0.7);
  EXPECT_NEAR(margin(ms, "pleP1"), 0.0, 1e-15);
  // B^T dP B = 1 = n, so the lower bound is tight.
  EXPECT_NEAR(margin(ms, "pleP4"), 0.0, 1e-14);
  for (const auto& m : ms) EXPECT_TRUE(m.holds()) << m.name;
}

TEST(Properties, BenchmarkPlantHoldAcrossGammas) {
  const ple::Solver s(fixtures::bench_a(), fixtures::bench_b1() + fixtures::bench_b2());
  ple::PropertyOptions opts;
  opts.mu = ple::estimate_mu_bounds(s, 10.0, 25);
  for (double g : {1e-3, 0.03, 1.0, 10.0}) {
    for (const auto& m : ple::check_ple_properties(s, g, opts)) {
      EXPECT_TRUE(m.holds()) << m.name << " at " << g << ": " << m.normalized();
    }
  }
}

TEST(Diagnose, BenchmarkPlant) {
  const ple::Solver s(fixtures::bench_a(), fixtures::bench_b1() + fixtures::bench_b2());
  const auto d = ple::diagnose(s, 1.0);
  EXPECT_EQ(d.alphaA, 4);
  EXPECT_EQ(d.delta, 7);
  EXPECT_DOUBLE_EQ(d.pi(1.0), 4.0);
  EXPECT_TRUE(std::isfinite(d.deltaC));
  EXPECT_TRUE(d.all_hold());
}
