#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lowgain/control.hpp"

using namespace lowgain;
using namespace lowgain::control;
using linalg::Matrix;
using linalg::Vector;

namespace {

model::Plant scalar_plant() {
  return model::Plant(Matrix::Zero(1, 1), {Matrix::Ones(1, 1)}, Matrix::Ones(1, 1));
}

}  // namespace

TEST(ControlInput, ScalarConstantGamma) {
  const Vector x = Vector::Constant(1, 3.0);
  EXPECT_NEAR(control_input(scalar_plant(), ConstantGammaState{0.4}, 5.0, x)(0), -1.2, 1e-15);
}

TEST(ControlInput, ScalarTimeVarying) {
  const schedule::GainSchedule s{2, 1, 0.5};
  const Vector x = Vector::Constant(1, 1.0);
  EXPECT_NEAR(control_input(scalar_plant(), TimeVaryingState{s}, 3.0, x)(0), -1.0, 1e-14);
}

TEST(ControlInput, OpenLoopIsZero) {
  const Vector x = Vector::Constant(4, 2.0);
  const Vector u = control_input(fixtures::bench_plant(), OpenLoop{}, 1.0, x);
  ASSERT_EQ(u.size(), 2);
  EXPECT_EQ(u.norm(), 0.0);
  EXPECT_FALSE(mode_gamma(OpenLoop{}, 1.0).has_value());
}

TEST(ControlInput, LinearInState) {
  const auto plant = fixtures::bench_plant();
  const ControllerMode mode = TimeVaryingState{{2, 1.2, 0.5}};
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  const Vector x = Vector::NullaryExpr(4, [&] { return nd(rng); });
  const Vector z = Vector::NullaryExpr(4, [&] { return nd(rng); });
  const Vector lhs = control_input(plant, mode, 2.5, 2.0 * x - 3.0 * z);
  const Vector rhs = 2.0 * control_input(plant, mode, 2.5, x) - 3.0 * control_input(plant, mode, 2.5, z);
  EXPECT_LT((lhs - rhs).norm(), 1e-12 * (1 + lhs.norm()));
}

TEST(Gain, MatchesPrintedFormula) {
  const auto plant = fixtures::bench_plant();
  const ple::Solver s(plant.a(), plant.b());
  for (double g : {0.01, 0.25, 0.5, 1.0, 2.0}) {
    const Matrix k = plant.b().transpose() * s.solve(g).P;
    EXPECT_LT(fixtures::max_rel(k, fixtures::printed_k(g)), 1e-10) << g;
  }
  const Matrix k1 = plant.b().transpose() * s.solve(1.0).P;
  EXPECT_NEAR(k1(0, 0), 458.0 / 541.0, 1e-13);
  EXPECT_LE(fixtures::printed_k(0.01).cwiseAbs().maxCoeff(), 0.1);
}

TEST(GainTable, InterpolationAccuracy) {
  const auto plant = fixtures::bench_plant();
  const ple::Solver s(plant.a(), plant.b());
  const GainTable table(s, 0.01, 2.0, 200);
  EXPECT_NEAR(table.gamma_lo(), 0.01, 1e-15);
  EXPECT_NEAR(table.gamma_hi(), 2.0, 1e-12);
  for (double g : {0.0123, 0.0789, 0.31, 1.77}) {
    EXPECT_LT(fixtures::max_rel(table.p(g), s.solve(g).P), 1e-9) << g;
  }
  // Outside the table a direct solve is used.
  EXPECT_LT(fixtures::max_rel(table.p(5.0), s.solve(5.0).P), 1e-14);
}

TEST(FeedbackLaw, AgreesWithDirectEvaluation) {
  const auto plant = fixtures::bench_plant();
  const ControllerMode mode = TimeVaryingState{{2, 1, 0.5}};
  const FeedbackLaw law(plant, mode, 50.0);
  const Vector x = (Vector(4) << 1, 2, -2, -6).finished();
  for (double t : {0.0, 0.37, 9.9, 50.0}) {
    EXPECT_DOUBLE_EQ(law.gamma(t), schedule::gamma_at({2, 1, 0.5}, t).gamma);
    const Vector direct = control_input(plant, mode, t, x);
    EXPECT_LT((law.input(t, x) - direct).norm(), 1e-9 * direct.norm()) << t;
  }
  const FeedbackLaw open(plant, OpenLoop{}, 10.0);
  EXPECT_TRUE(std::isnan(open.gamma(1.0)));
  EXPECT_FALSE(open.p(1.0).has_value());
  EXPECT_EQ(open.input(1.0, x).norm(), 0.0);
}

TEST(ObserverCertificate, Scalar) {
  const auto cert = validate_observer_gain(scalar_plant(), Matrix::Ones(1, 1));
  EXPECT_NEAR(cert.Q(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(cert.rho, 2.0, 1e-14);
  EXPECT_NEAR(cert.hurwitzMargin, 1.0, 1e-15);
}

TEST(ObserverCertificate, BenchmarkGain) {
  const auto plant = fixtures::bench_plant();
  const auto cert = validate_observer_gain(plant, fixtures::bench_l());
  EXPECT_NEAR(cert.hurwitzMargin, 1.0, 1e-6);
  const Matrix f = plant.a() - fixtures::bench_l() * plant.c();
  EXPECT_LT((f.transpose() * cert.Q + cert.Q * f + Matrix::Identity(4, 4)).norm(), 1e-9);
  EXPECT_GT(linalg::definiteness_margin(cert.Q), 0.0);
}

TEST(ObserverCertificate, Errors) {
  const auto plant = fixtures::bench_plant();
  try {
    (void)validate_observer_gain(plant, Matrix::Zero(4, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotHurwitz);
  }
  try {
    (void)validate_observer_gain(plant, Matrix::Zero(3, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
  Matrix c(1, 2);
  c << 0, 1;
  const model::Plant blind(fixtures::example1_a(0), {fixtures::example1_b()}, c);
  try {
    (void)validate_observer_gain(blind, Matrix::Ones(2, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotObservable);
  }
}

TEST(ObserverRhs, Examples) {
  const auto plant = fixtures::bench_plant();
  const Matrix l = fixtures::bench_l();
  const Vector xi = (Vector(4) << 0.3, -1, 2, 0.5).finished();
  EXPECT_LT((observer_rhs(plant, l, xi, plant.c() * xi) - plant.a() * xi).norm(), 1e-15);
  const Vector y = (Vector(2) << 1.5, -2).finished();
  EXPECT_LT((observer_rhs(plant, l, Vector::Zero(4), y) - l * y).norm(), 1e-15);
}

TEST(PlaceObserverPole, Example1) {
  Matrix c(1, 2);
  c << 1, 0;
  const model::Plant plant(fixtures::example1_a(0), {fixtures::example1_b()}, c);
  const Matrix l = place_repeated_observer_pole(plant, -2.0);
  EXPECT_NEAR(validate_observer_gain(plant, l).hurwitzMargin, 2.0, 1e-6);
}
