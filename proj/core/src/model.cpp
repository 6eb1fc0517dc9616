#include "lowgain/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lowgain::model {

Plant::Plant(Matrix a, std::vector<Matrix> bs, Matrix c)
    : a_(std::move(a)), bs_(std::move(bs)), c_(std::move(c)) {
  linalg::require_square(a_, "A");
  linalg::require_finite(a_, "A");
  linalg::require_finite(c_, "C");
  if (bs_.empty()) throw Error(ErrorKind::InvalidDimension, "plant needs at least one B_i");
  const Eigen::Index n = a_.rows();
  const Eigen::Index m = bs_.front().cols();
  if (m == 0) throw Error(ErrorKind::InvalidDimension, "B_i must have at least one column");
  bsum_ = Matrix::Zero(n, m);
  for (std::size_t i = 0; i < bs_.size(); ++i) {
    const Matrix& bi = bs_[i];
    if (bi.rows() != n || bi.cols() != m) {
      throw Error(ErrorKind::DimensionMismatch,
                  "B_" + std::to_string(i + 1) + " must be " + std::to_string(n) + " x " +
                      std::to_string(m));
    }
    linalg::require_finite(bi, "B_i");
    bsum_ += bi;
  }
  if (c_.cols() != n) throw Error(ErrorKind::DimensionMismatch, "C must have n columns");
}

DelayProfile::DelayProfile(std::vector<DelayChannel> channels, double tau_bar, double d)
    : channels_(std::move(channels)), tau_bar_(tau_bar), d_(d) {
  if (channels_.empty()) throw Error(ErrorKind::InvalidDelayProfile, "no delay channels");
  if (!(tau_bar_ > 0.0) || !std::isfinite(tau_bar_)) {
    throw Error(ErrorKind::InvalidDelayProfile, "tau_bar must be positive");
  }
  if (!(d_ >= 0.0 && d_ < 1.0)) {
    throw Error(ErrorKind::InvalidDelayProfile, "d must lie in [0, 1)");
  }
  for (const auto& ch : channels_) {
    if (const auto* table = std::get_if<TableDelay>(&ch)) {
      if (table->points.empty()) throw Error(ErrorKind::InvalidDelayProfile, "empty table");
      for (std::size_t i = 1; i < table->points.size(); ++i) {
        if (!(table->points[i].first > table->points[i - 1].first)) {
          throw Error(ErrorKind::InvalidDelayProfile, "table breakpoints must increase");
        }
      }
    }
  }
}

double delay_value(const DelayChannel& channel, double t) {
  struct Visitor {
    double t;
    double operator()(const ConstantDelay& c) const { return c.value; }
    double operator()(const SinusoidDelay& s) const {
      return s.offset + s.amplitude * std::sin(s.frequency * t);
    }
    double operator()(const TableDelay& tab) const {
      const auto& pts = tab.points;
      if (t <= pts.front().first) return pts.front().second;
      if (t >= pts.back().first) return pts.back().second;
      const auto hi = std::upper_bound(pts.begin(), pts.end(), t,
                                       [](double v, const auto& p) { return v < p.first; });
      const auto lo = hi - 1;
      const double w = (t - lo->first) / (hi->first - lo->first);
      return lo->second + w * (hi->second - lo->second);
    }
  };
  return std::visit(Visitor{t}, channel);
}

double delay_value(const DelayProfile& profile, int channel, double t) {
  if (channel < 0 || channel >= profile.q()) {
    throw Error(ErrorKind::ChannelOutOfRange, "channel " + std::to_string(channel));
  }
  return delay_value(profile.channels()[static_cast<std::size_t>(channel)], t);
}

Assumption1Report verify_assumption1(const Matrix& a, const Matrix& b) {
  Assumption1Report r;
  r.controllabilityRank = linalg::numeric_rank(linalg::controllability_matrix(a, b));
  r.controllable = r.controllabilityRank == a.rows();
  double largest = 0.0;
  for (const auto& l : linalg::spectrum(a)) largest = std::max(largest, std::abs(l));
  r.nilpotent = largest <= 1e-8 * std::max(1.0, a.norm());
  r.alphaA = r.nilpotent ? linalg::nilpotency_index(a).value_or(0) : 0;
  return r;
}

Assumption1Report verify_assumption1(const Plant& plant) {
  return verify_assumption1(plant.a(), plant.b());
}

bool observable(const Plant& plant) {
  return linalg::numeric_rank(linalg::observability_matrix(plant.a(), plant.c())) == plant.n();
}

Assumption3Report verify_assumption3(const DelayProfile& profile, double horizon, double step) {
  if (!(horizon > 0.0) || !(step > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "horizon and step must be positive");
  }
  Assumption3Report r;
  r.tauMinObserved = std::numeric_limits<double>::infinity();
  const double diff = step / 2.0;
  const auto count = static_cast<long long>(std::ceil(horizon / step));
  for (const auto& ch : profile.channels()) {
    for (long long k = 0; k <= count; ++k) {
      const double t = std::min(horizon, static_cast<double>(k) * step);
      const double tau = delay_value(ch, t);
      r.tauBarObserved = std::max(r.tauBarObserved, tau);
      r.tauMinObserved = std::min(r.tauMinObserved, tau);
      const double rate = (delay_value(ch, t + diff) - delay_value(ch, t - diff)) / (2.0 * diff);
      r.dObserved = std::max(r.dObserved, rate);
    }
  }
  constexpr double tol = 1e-6;
  r.pass = r.tauMinObserved >= -tol && r.tauBarObserved <= profile.tau_bar() + tol &&
           r.dObserved <= profile.d() + tol;
  return r;
}

}  // namespace lowgain::model
