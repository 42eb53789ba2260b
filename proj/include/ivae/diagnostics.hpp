#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ivae/bounds.hpp"
#include "ivae/gaussian.hpp"

namespace ivae {

// Longitudinal histogram of decoder standard deviations over fixed
// log-spaced bins (1e-12 .. 1e2, quarter-decade width) plus under/overflow
// bins, so epochs and runs bin identically.
class SigmaHistogram {
 public:
  static constexpr int kDecadeLo = -12;
  static constexpr int kDecadeHi = 2;
  static constexpr int kBinsPerDecade = 4;
  static constexpr int kInnerBins = (kDecadeHi - kDecadeLo) * kBinsPerDecade;
  static constexpr int kBins = kInnerBins + 2;  // + underflow + overflow

  void observe(const Mat& sigma);
  void reset();

  std::uint64_t total() const { return total_; }
  const std::array<std::uint64_t, kBins>& counts() const { return counts_; }
  double fraction_below(double threshold) const;
  static double bin_lower_edge(int inner_bin);

 private:
  std::array<std::uint64_t, kBins> counts_{};
  std::uint64_t total_ = 0;
  std::uint64_t below_1e3_ = 0;
};

// 100-bin histogram of decoder means over [0, 1].
class MeanHistogram {
 public:
  static constexpr int kBins = 100;
  void observe(const Mat& mu);
  void reset();
  std::uint64_t total() const { return total_; }
  const std::array<std::uint64_t, kBins>& counts() const { return counts_; }

 private:
  std::array<std::uint64_t, kBins> counts_{};
  std::uint64_t total_ = 0;
};

struct DecoderStats {
  SigmaHistogram sigma;
  MeanHistogram mean;
  void observe(const DiagGaussian& dist);
  void reset();
};

struct UnbalanceRecord {
  int epoch = 0;
  double abs_reconstruction = 0.0;
  double abs_divergence = 0.0;
  double ratio = 0.0;
  bool any_nonfinite = false;
};

UnbalanceRecord record_terms(const BoundTerms& terms, int epoch);

// CSV serialization of the full histograms, one row per bin.
std::string histogram_csv(const DecoderStats& stats);

}  // namespace ivae
