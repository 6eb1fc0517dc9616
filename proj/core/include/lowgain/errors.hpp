#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lowgain {

enum class ErrorKind {
  NonFinite,
  DimensionMismatch,
  SingularLyapunov,
  NotPositiveDefinite,
  GammaTooSmall,
  NotControllable,
  NotObservable,
  NotHurwitz,
  HypothesisViolated,
  NegativeTime,
  InvalidDimension,
  InvalidArgument,
  ChannelOutOfRange,
  InvalidDelayProfile,
  InsufficientHistory,
  ConfigParse,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lowgain
