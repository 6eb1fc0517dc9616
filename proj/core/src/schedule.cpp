#include "lowgain/schedule.hpp"

#include <cmath>
#include <string>

#include "lowgain/errors.hpp"

namespace lowgain::schedule {

namespace {

void require_time(double t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::NegativeTime, "t = " + std::to_string(t));
}

}  // namespace

void GainSchedule::validate() const {
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) {
    throw Error(ErrorKind::InvalidArgument, "gamma0 must be positive");
  }
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw Error(ErrorKind::InvalidArgument, "omega must be positive");
  }
  if (!(mu > 0.0 && mu < 1.0)) throw Error(ErrorKind::InvalidArgument, "mu must lie in (0, 1)");
}

double GainSchedule::k() const { return omega * mu / std::pow(gamma0, 1.0 / mu); }

GammaPoint gamma_at(const GainSchedule& s, double t) {
  require_time(t);
  const double base = s.omega * t + 1.0;
  const double scaled = std::pow(base, -s.mu);
  return {s.gamma0 * scaled, -s.omega * s.mu * s.gamma0 * scaled / base};
}

double log_envelope_f(const GainSchedule& s, double t) {
  require_time(t);
  return s.gamma0 * std::pow(s.omega * t + 1.0, 1.0 - s.mu) / (4.0 * s.omega * (1.0 - s.mu));
}

double envelope_f(const GainSchedule& s, double t) { return std::exp(log_envelope_f(s, t)); }

double gamma_star_bound(int n, double tau_bar) {
  if (n < 1) throw Error(ErrorKind::InvalidDimension, "n must be at least 1");
  if (!(tau_bar > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau_bar must be positive");
  const double dn = n;
  return 1.0 / ((1.0 + std::sqrt(3.0)) * dn * std::sqrt(dn) * tau_bar);
}

double baseline_gamma(int n, double tau_bar) { return 0.9 * gamma_star_bound(n, tau_bar); }

}  // namespace lowgain::schedule
