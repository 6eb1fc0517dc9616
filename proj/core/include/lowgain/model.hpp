#pragma once

#include <utility>
#include <variant>
#include <vector>

#include "lowgain/linalg.hpp"

namespace lowgain::model {

using linalg::Matrix;

/// x' = A x + sum_i B_i u(t - tau_i(t)),  y = C x.
class Plant {
 public:
  /// Throws DimensionMismatch, InvalidDimension (no channels) or NonFinite.
  Plant(Matrix a, std::vector<Matrix> bs, Matrix c);

  [[nodiscard]] const Matrix& a() const noexcept { return a_; }
  [[nodiscard]] const std::vector<Matrix>& bs() const noexcept { return bs_; }
  [[nodiscard]] const Matrix& c() const noexcept { return c_; }
  /// B = B_1 + ... + B_q.
  [[nodiscard]] const Matrix& b() const noexcept { return bsum_; }
  [[nodiscard]] int n() const noexcept { return static_cast<int>(a_.rows()); }
  [[nodiscard]] int m() const noexcept { return static_cast<int>(bsum_.cols()); }
  [[nodiscard]] int p() const noexcept { return static_cast<int>(c_.rows()); }
  [[nodiscard]] int q() const noexcept { return static_cast<int>(bs_.size()); }

 private:
  Matrix a_;
  std::vector<Matrix> bs_;
  Matrix c_;
  Matrix bsum_;
};

struct ConstantDelay {
  double value = 0.0;
};

/// tau(t) = offset + amplitude sin(frequency t).
struct SinusoidDelay {
  double offset = 0.0;
  double amplitude = 0.0;
  double frequency = 0.0;
};

/// Piecewise linear through (t, tau) breakpoints, held constant outside.
struct TableDelay {
  std::vector<std::pair<double, double>> points;
};

using DelayChannel = std::variant<ConstantDelay, SinusoidDelay, TableDelay>;

class DelayProfile {
 public:
  /// Throws InvalidDelayProfile for an empty channel list, tau_bar <= 0,
  /// d outside [0, 1) or an unsorted table.
  DelayProfile(std::vector<DelayChannel> channels, double tau_bar, double d);

  [[nodiscard]] const std::vector<DelayChannel>& channels() const noexcept { return channels_; }
  [[nodiscard]] int q() const noexcept { return static_cast<int>(channels_.size()); }
  [[nodiscard]] double tau_bar() const noexcept { return tau_bar_; }
  [[nodiscard]] double d() const noexcept { return d_; }

 private:
  std::vector<DelayChannel> channels_;
  double tau_bar_;
  double d_;
};

/// tau_i(t). Throws ChannelOutOfRange.
[[nodiscard]] double delay_value(const DelayProfile& profile, int channel, double t);
[[nodiscard]] double delay_value(const DelayChannel& channel, double t);

struct Assumption1Report {
  bool controllable = false;
  bool nilpotent = false;
  int alphaA = 0;
  int controllabilityRank = 0;

  [[nodiscard]] bool pass() const { return controllable && nilpotent; }
};

[[nodiscard]] Assumption1Report verify_assumption1(const Matrix& a, const Matrix& b);
[[nodiscard]] Assumption1Report verify_assumption1(const Plant& plant);

/// rank of [C; CA; ...; CA^{n-1}] equals n.
[[nodiscard]] bool observable(const Plant& plant);

struct Assumption3Report {
  double tauBarObserved = 0.0;
  double tauMinObserved = 0.0;
  double dObserved = 0.0;
  bool pass = false;
};

/// Samples every channel on [0, horizon] with the given step and a central
/// difference for the derivative.
[[nodiscard]] Assumption3Report verify_assumption3(const DelayProfile& profile, double horizon,
                                                   double step);

}  // namespace lowgain::model
