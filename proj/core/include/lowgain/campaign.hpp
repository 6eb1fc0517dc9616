#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "lowgain/ple.hpp"

namespace lowgain::cli {

using linalg::Matrix;

struct RandomPair {
  Matrix A;
  Matrix B;
  /// Jordan block sizes of A.
  std::vector<int> blocks;
};

/// A = T J T^{-1} with J nilpotent in Jordan form and T an integer matrix with
/// entries in [-2, 2], determinant +-1 and condition number <= 1e3, so A is an
/// exactly nilpotent integer matrix. B has entries uniform in [-1, 1] and is
/// redrawn until (A, B) is controllable; it has one column per Jordan block.
[[nodiscard]] RandomPair random_nilpotent_pair(std::mt19937_64& rng, int n, bool single_block);

struct WorstMargin {
  double normalized = 0.0;
  double value = 0.0;
  double scale = 1.0;
  int pair = -1;
  double gamma = 0.0;
};

struct CampaignOptions {
  bool singleBlockOnly = false;
  int gammaCount = 13;
  double gammaLo = 1e-3;
  double gammaHi = 10.0;
  double tolerance = 1e-8;
  double fdTolerance = 1e-5;
};

struct CampaignReport {
  std::uint64_t seed = 0;
  int count = 0;
  int nMax = 0;
  std::vector<double> gammas;
  std::map<std::string, WorstMargin> worst;
  /// max ||FD - dP||_F / ||dP||_F with a central difference of step 1e-5 gamma.
  double worstDerivativeError = 0.0;
  std::vector<int> dimensions;
  bool pass = false;

  [[nodiscard]] std::string summary() const;
};

/// Throws InvalidArgument for count < 1 or nMax outside [1, 8].
[[nodiscard]] CampaignReport property_campaign(std::uint64_t seed, int count, int n_max,
                                               const CampaignOptions& options = {});

}  // namespace lowgain::cli
