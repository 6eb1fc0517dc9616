#include <cmath>

#include <gtest/gtest.h>

#include "lowgain/errors.hpp"
#include "lowgain/schedule.hpp"

using namespace lowgain;
using schedule::GainSchedule;

TEST(GammaAt, Examples) {
  const GainSchedule s{2, 1, 0.5};
  EXPECT_DOUBLE_EQ(schedule::gamma_at(s, 0).gamma, 2.0);
  EXPECT_DOUBLE_EQ(schedule::gamma_at(s, 3).gamma, 1.0);
}

TEST(GammaAt, DerivativeIdentity) {
  for (GainSchedule s : {GainSchedule{2, 1, 0.5}, GainSchedule{0.5, 1.2, 0.375},
                         GainSchedule{3, 0.8, 0.75}}) {
    for (double t : {0.0, 0.7, 12.0, 500.0}) {
      const auto pt = schedule::gamma_at(s, t);
      EXPECT_NEAR(pt.gammaDot, -s.k() * std::pow(pt.gamma, 1 + 1 / s.mu),
                  1e-13 * std::abs(pt.gammaDot));
      if (t == 0.0) continue;
      const double h = 1e-4 * t;
      const double fd =
          (schedule::gamma_at(s, t + h).gamma - schedule::gamma_at(s, t - h).gamma) / (2 * h);
      EXPECT_NEAR(fd, pt.gammaDot, 1e-6 * std::abs(pt.gammaDot));
    }
  }
}

TEST(GammaAt, VanishesAndDecreases) {
  for (double mu : {0.25, 0.5, 0.75}) {
    const GainSchedule s{3, 1, mu};
    // gamma(t) / gamma0 = (t + 1)^-mu, so 1e-6 is reached at t = 1e12 only for mu >= 1/2.
    EXPECT_LT(schedule::gamma_at(s, 2 * std::pow(10.0, 6.0 / mu)).gamma, 1e-6 * s.gamma0);
    EXPECT_NEAR(schedule::gamma_at(s, 1e12).gamma, s.gamma0 * std::pow(1e12 + 1, -mu),
                1e-12 * s.gamma0);
    double prev = s.gamma0;
    for (double t = 0.5; t < 100; t += 0.5) {
      const double g = schedule::gamma_at(s, t).gamma;
      EXPECT_LT(g, prev);
      prev = g;
    }
  }
}

TEST(GammaAt, Errors) {
  try {
    (void)schedule::gamma_at(GainSchedule{}, -1e-9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NegativeTime);
  }
  EXPECT_THROW((GainSchedule{0, 1, 0.5}.validate()), Error);
  EXPECT_THROW((GainSchedule{1, 1, 1.0}.validate()), Error);
  EXPECT_THROW((GainSchedule{1, -1, 0.5}.validate()), Error);
}

TEST(Envelope, Examples) {
  const GainSchedule s{2, 1, 0.5};
  EXPECT_NEAR(schedule::envelope_f(s, 0), std::exp(1.0), 1e-15);
  EXPECT_NEAR(schedule::log_envelope_f(s, 3), 2.0, 1e-15);
  for (double dmu : {0.5, 2.0, 4.0}) {
    auto ratio = [&](double t) {
      return dmu * std::log(s.omega * t + 1) - schedule::log_envelope_f(s, t);
    };
    EXPECT_LT(ratio(1e6), std::log(1e-10) + ratio(10));
  }
}

TEST(GammaStar, Examples) {
  EXPECT_NEAR(schedule::gamma_star_bound(1, 1.0), 1 / (1 + std::sqrt(3.0)), 1e-15);
  EXPECT_NEAR(schedule::gamma_star_bound(4, 1.4), 0.0326808396, 1e-9);
  EXPECT_NEAR(schedule::baseline_gamma(4, 1.4), 0.9 * schedule::gamma_star_bound(4, 1.4), 1e-17);
  EXPECT_THROW((void)schedule::gamma_star_bound(0, 1.0), Error);
}
