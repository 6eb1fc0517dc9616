#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lowgain/sim.hpp"

using namespace lowgain;
using namespace lowgain::sim;
using linalg::Matrix;
using linalg::Vector;

namespace {

model::Plant scalar_plant() {
  return model::Plant(Matrix::Zero(1, 1), {Matrix::Ones(1, 1)}, Matrix::Ones(1, 1));
}

Vector v1(double x) { return Vector::Constant(1, x); }

// x' = -x(t - 1), x = 1 on [-1, 0], realized as A = 0, B = 1, u = -x with a
// unit delay and u = -1 before t = 0.
Trajectory unit_delay_run(double t_end, double h) {
  const model::DelayProfile prof({model::ConstantDelay{1.0}}, 1.0, 0.0);
  SimConfig c;
  c.step = h;
  c.tEnd = t_end;
  c.x0 = v1(1.0);
  c.recordStride = 1;
  c.u0History = [](double) { return v1(-1.0); };
  return integrate_closed_loop(scalar_plant(), prof, control::ConstantGammaState{1.0}, c);
}

// Method of steps in the local variable s in [0, 1] of each unit interval:
// p_k(s) = p_{k-1}(1) - int_0^s p_{k-1}(r) dr, p_0 = 1.
double method_of_steps(double t) {
  std::vector<double> p{1.0};
  auto eval = [](const std::vector<double>& c, double s) {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * s + c[i];
    return v;
  };
  const int k = static_cast<int>(std::floor(t));
  for (int j = 0; j <= k; ++j) {
    std::vector<double> q(p.size() + 1, 0.0);
    q[0] = eval(p, 1.0);
    for (std::size_t i = 0; i < p.size(); ++i) q[i + 1] = -p[i] / static_cast<double>(i + 1);
    p = q;
  }
  return eval(p, t - k);
}

double remark3_max_error(double h, double t_end) {
  const model::DelayProfile prof({model::ConstantDelay{0.0}}, 1.0, 0.0);
  SimConfig c;
  c.step = h;
  c.tEnd = t_end;
  c.x0 = v1(1.0);
  c.recordStride = 1;
  const auto tr =
      integrate_closed_loop(scalar_plant(), prof, control::TimeVaryingState{{1, 1, 0.5}}, c);
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double exact = std::exp(2.0 - 2.0 * std::sqrt(tr.times[i] + 1.0));
    worst = std::max(worst, std::abs(tr.x[i](0) - exact));
  }
  return worst;
}

SimConfig bench_config(double t_end) {
  SimConfig c;
  c.tEnd = t_end;
  c.x0 = (Vector(4) << 1, 2, -2, -6).finished();
  return c;
}

model::DelayProfile bench_delays() {
  return model::DelayProfile({model::SinusoidDelay{1, 0.4, 2}, model::SinusoidDelay{0.3, 0.3, 3}},
                             1.4, 0.9);
}

}  // namespace

TEST(HistoryBuffer, NodesAreExact) {
  HistoryBuffer buf(0.1, 10.0);
  for (int i = 0; i <= 20; ++i) {
    const double t = 0.1 * i;
    buf.push(t, v1(std::sin(t)), v1(std::cos(t)));
  }
  for (int i = 0; i <= 20; ++i) {
    const double t = 0.1 * i;
    EXPECT_EQ(buf.value(t)(0), std::sin(t));
  }
  EXPECT_THROW((void)buf.value(2.5), Error);
  EXPECT_THROW(buf.push(1.0, v1(0), v1(0)), Error);
}

TEST(HistoryBuffer, FourthOrderOnSine) {
  auto max_err = [](double h) {
    HistoryBuffer buf(h, 100.0);
    const int count = static_cast<int>(std::lround(4.0 / h));
    for (int i = 0; i <= count; ++i) buf.push(i * h, v1(std::sin(i * h)), v1(std::cos(i * h)));
    double worst = 0.0;
    for (double s = 0.013; s < 4.0; s += 0.0377) {
      worst = std::max(worst, std::abs(buf.value(s)(0) - std::sin(s)));
    }
    return worst;
  };
  const double e1 = max_err(0.2);
  const double e2 = max_err(0.1);
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e2, 1e-5);
}

TEST(HistoryBuffer, TrimsToWindow) {
  HistoryBuffer buf(0.1, 1.0);
  for (int i = 0; i <= 50; ++i) buf.push(0.1 * i, v1(i), v1(0));
  EXPECT_LE(buf.back_time() - buf.front_time(), 1.0 + 0.3);
  EXPECT_GE(buf.back_time() - buf.front_time(), 1.0);
}

TEST(Hermite, ExactOnCubics) {
  auto f = [](double t) { return 2 * t * t * t - t * t + 3; };
  auto df = [](double t) { return 6 * t * t - 2 * t; };
  for (double s : {0.5, 0.9, 1.3}) {
    EXPECT_NEAR(hermite(0.5, v1(f(0.5)), v1(df(0.5)), 1.3, v1(f(1.3)), v1(df(1.3)), s)(0), f(s),
                1e-14);
  }
  EXPECT_NEAR(hermite(0.5, v1(f(0.5)), v1(df(0.5)), 1.3, v1(f(1.3)), v1(df(1.3)), 0.77)(0),
              f(0.77), 1e-14);
}

TEST(Integrate, DelayFreeScalarClosedForm) {
  const model::DelayProfile prof({model::ConstantDelay{0.0}}, 1.0, 0.0);
  SimConfig c;
  c.tEnd = 3.0;
  c.x0 = v1(1.0);
  c.recordStride = 1;
  const auto tr =
      integrate_closed_loop(scalar_plant(), prof, control::TimeVaryingState{{1, 1, 0.5}}, c);
  EXPECT_NEAR(tr.times.back(), 3.0, 1e-12);
  EXPECT_NEAR(tr.x.back()(0), std::exp(-2.0), 1e-6);
  EXPECT_LT(remark3_max_error(1e-3, 50.0), 1e-6);
}

TEST(Integrate, FourthOrderConvergence) {
  const double e1 = remark3_max_error(0.2, 5.0);
  const double e2 = remark3_max_error(0.1, 5.0);
  EXPECT_GT(e1 / e2, 10.0) << e1 << " " << e2;
  EXPECT_LT(e1 / e2, 20.0) << e1 << " " << e2;
}

TEST(Integrate, UnitDelayMethodOfSteps) {
  EXPECT_NEAR(method_of_steps(1.5), -0.375, 1e-15);
  EXPECT_NEAR(method_of_steps(2.0), -0.5, 1e-15);
  const auto tr = unit_delay_run(10.0, 1e-3);
  EXPECT_NEAR(tr.x[1500](0), -0.375, 1e-6);
  EXPECT_NEAR(tr.x[2000](0), -0.5, 1e-6);
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.size(); i += 7) {
    worst = std::max(worst, std::abs(tr.x[i](0) - method_of_steps(tr.times[i])));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Integrate, ZeroInitialData) {
  const auto plant = fixtures::bench_plant();
  SimConfig c = bench_config(5.0);
  c.x0 = Vector::Zero(4);
  const auto tr = integrate_closed_loop(plant, bench_delays(), control::TimeVaryingState{{2, 1, 0.5}}, c);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_EQ(tr.x[i].norm(), 0.0);
    EXPECT_EQ(tr.u[i].norm(), 0.0);
  }
}

TEST(Integrate, DeterministicAndConsistent) {
  const auto plant = fixtures::bench_plant();
  const control::ControllerMode mode = control::TimeVaryingState{{2, 1.2, 0.5}};
  const SimConfig c = bench_config(8.0);
  const auto a = integrate_closed_loop(plant, bench_delays(), mode, c);
  const auto b = integrate_closed_loop(plant, bench_delays(), mode, c);
  ASSERT_EQ(a.size(), b.size());
  ASSERT_EQ(a.size(), 801u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.times[i], b.times[i]);
    EXPECT_EQ(a.x[i], b.x[i]);
    EXPECT_EQ(a.u[i], b.u[i]);
    EXPECT_EQ(a.gammas[i], schedule::gamma_at({2, 1.2, 0.5}, a.times[i]).gamma);
    EXPECT_EQ(a.normX[i], a.x[i].norm());
    if (i > 0) EXPECT_NEAR(a.times[i] - a.times[i - 1], 0.01, 1e-12);
  }
  // V appears once 2 tau_bar of record exists and dominates V0.
  EXPECT_TRUE(std::isnan(a.V[270]));
  for (std::size_t i = 281; i < a.size(); ++i) EXPECT_GE(a.V[i], a.V0[i]);
}

TEST(Integrate, StepRefinementAgrees) {
  const auto plant = fixtures::bench_plant();
  const control::ControllerMode mode = control::TimeVaryingState{{2, 1, 0.5}};
  SimConfig c = bench_config(20.0);
  c.recordStride = 100;
  const auto coarse = integrate_closed_loop(plant, bench_delays(), mode, c);
  c.step = 5e-4;
  c.recordStride = 200;
  const auto fine = integrate_closed_loop(plant, bench_delays(), mode, c);
  ASSERT_EQ(coarse.size(), fine.size());
  EXPECT_LT((coarse.x.back() - fine.x.back()).norm(), 1e-4 * fine.x.back().norm());
}

TEST(Integrate, ObserverInputUsesEstimateOnly) {
  const auto plant = fixtures::bench_plant();
  const control::ControllerMode mode = control::ObserverBased{{1, 1, 0.95}, fixtures::bench_l()};
  SimConfig c = bench_config(6.0);
  c.xi0 = (Vector(4) << -1, 1, 1, -1).finished();
  const auto a = integrate_closed_loop(plant, bench_delays(), mode, c);
  SimConfig c2 = c;
  c2.x0 = c.x0 + (Vector(4) << 0, 5, 0, -3).finished();  // C x0 unchanged
  const auto b = integrate_closed_loop(plant, bench_delays(), mode, c2);
  EXPECT_EQ(a.u[0], b.u[0]);
  const control::FeedbackLaw law(plant, mode, 6.0);
  for (std::size_t i = 0; i < a.size(); i += 50) {
    EXPECT_LT((a.u[i] - law.input(a.times[i], a.xi[i])).norm(), 1e-12 * (1 + a.u[i].norm()));
    EXPECT_LT((a.e[i] - (a.xi[i] - a.x[i])).norm(), 1e-15);
    EXPECT_EQ(a.normE[i], a.e[i].norm());
  }
}

TEST(Integrate, Errors) {
  SimConfig c;
  c.tEnd = 1.0;
  c.x0 = Vector::Ones(2);
  const model::Plant unstable(Matrix::Identity(2, 2), {fixtures::example1_b()},
                              Matrix::Identity(2, 2));
  const model::DelayProfile prof({model::ConstantDelay{0.5}}, 1.0, 0.0);
  try {
    (void)integrate_closed_loop(unstable, prof, control::TimeVaryingState{}, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::HypothesisViolated);
  }
  EXPECT_NO_THROW((void)integrate_closed_loop(unstable, prof, control::OpenLoop{}, c));

  const model::Plant ex1(fixtures::example1_a(0), {fixtures::example1_b()}, Matrix::Identity(2, 2));
  const model::DelayProfile fast({model::SinusoidDelay{0.3, 0.3, 4}}, 1.0, 0.9);
  try {
    (void)integrate_closed_loop(ex1, fast, control::TimeVaryingState{}, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidDelayProfile);
  }
}

TEST(Integrate, BlowUpStopsWithPartialTrajectory) {
  const model::Plant fast(Matrix::Constant(1, 1, 50.0), {Matrix::Ones(1, 1)}, Matrix::Ones(1, 1));
  const model::DelayProfile prof({model::ConstantDelay{0.1}}, 1.0, 0.0);
  SimConfig c;
  c.tEnd = 10.0;
  c.x0 = v1(1.0);
  const auto tr = integrate_closed_loop(fast, prof, control::OpenLoop{}, c);
  EXPECT_EQ(tr.status, SimStatus::NonFiniteState);
  EXPECT_LT(tr.times.back(), 10.0);
  EXPECT_FALSE(tr.warnings.empty());
}

TEST(Monitors, V0) {
  Matrix p(2, 2);
  p << 1, 1, 1, 2;
  EXPECT_EQ(evaluate_v0(p, Vector::Zero(2)), 0.0);
  EXPECT_EQ(evaluate_v0(p, (Vector(2) << 1, 0).finished()), 1.0);
  for (int i = 0; i < 100; ++i) EXPECT_GT(evaluate_v0(p, Vector::Random(2)), 0.0);
}

TEST(Monitors, KrasovskiiConstantSeries) {
  Trajectory tr;
  const double v = 2.5, g = 0.7, tau = 1.2, k3 = 1.5;
  for (int i = 0; i <= 1000; ++i) {
    tr.times.push_back(0.01 * i);
    tr.V0.push_back(v);
    tr.gammas.push_back(g);
  }
  EXPECT_NEAR(evaluate_krasovskii(tr, k3, tau, 7.0), v * (1 + 4 * k3 * g * g * g * tau), 1e-12);
  EXPECT_NEAR(evaluate_krasovskii(tr, k3, tau, 2.405), v * (1 + 4 * k3 * g * g * g * tau), 1e-12);
  try {
    (void)evaluate_krasovskii(tr, k3, tau, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientHistory);
  }
  std::fill(tr.V0.begin(), tr.V0.end(), 0.0);
  EXPECT_EQ(evaluate_krasovskii(tr, k3, tau, 7.0), 0.0);
}

TEST(Monitors, Settling) {
  std::vector<double> t, x;
  for (int i = 0; i <= 1000; ++i) {
    t.push_back(0.01 * i);
    x.push_back(std::exp(-0.01 * i));
  }
  auto m = settling_metrics(t, x, 0.01);
  EXPECT_DOUBLE_EQ(m.peak, 1.0);
  ASSERT_TRUE(m.settlingTime.has_value());
  EXPECT_NEAR(*m.settlingTime, std::log(100.0), 0.01);

  std::vector<double> zero(t.size(), 0.0);
  m = settling_metrics(t, zero, 0.01);
  EXPECT_EQ(m.peak, 0.0);
  EXPECT_EQ(m.settlingTime, 0.0);

  std::vector<double> grow;
  for (double s : t) grow.push_back(std::exp(s));
  EXPECT_FALSE(settling_metrics(t, grow, 0.01).settlingTime.has_value());
}

TEST(Monitors, EventualMonotone) {
  const std::vector<double> t{0, 1, 2, 3, 4, 5};
  const double nan = std::nan("");
  EXPECT_EQ(eventual_monotone_time(t, std::vector<double>{nan, 1, 3, 2, 2, 1}), 2.0);
  EXPECT_EQ(eventual_monotone_time(t, std::vector<double>{nan, nan, 5, 4, 3, 1}), 2.0);
  EXPECT_FALSE(eventual_monotone_time(t, std::vector<double>(6, nan)).has_value());
}
