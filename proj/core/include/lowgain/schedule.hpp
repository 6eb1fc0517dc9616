#pragma once

// Low-gain schedule gamma(t) = gamma0 / (omega t + 1)^mu.
namespace lowgain::schedule {

struct GainSchedule {
  double gamma0 = 1.0;
  double omega = 1.0;
  double mu = 0.5;

  /// Throws InvalidArgument unless gamma0 > 0, omega > 0 and 0 < mu < 1.
  void validate() const;
  /// k = omega mu / gamma0^{1/mu}, so that gamma' = -k gamma^{1 + 1/mu}.
  [[nodiscard]] double k() const;
};

struct GammaPoint {
  double gamma = 0.0;
  double gammaDot = 0.0;
};

/// Throws NegativeTime for t < 0.
[[nodiscard]] GammaPoint gamma_at(const GainSchedule& s, double t);

/// log f(t) = gamma0 (omega t + 1)^{1 - mu} / (4 omega (1 - mu)).
[[nodiscard]] double log_envelope_f(const GainSchedule& s, double t);
/// exp(log_envelope_f); overflows to +inf for large t.
[[nodiscard]] double envelope_f(const GainSchedule& s, double t);

/// 1 / ((1 + sqrt 3) n sqrt(n) tau_bar). Throws InvalidDimension for n < 1.
[[nodiscard]] double gamma_star_bound(int n, double tau_bar);

/// Constant gain used for the baseline mode: 0.9 * gamma_star_bound.
[[nodiscard]] double baseline_gamma(int n, double tau_bar);

}  // namespace lowgain::schedule
