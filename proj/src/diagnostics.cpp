#include "ivae/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ivae {

void SigmaHistogram::observe(const Mat& sigma) {
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    const double s = sigma(i);
    total_ += 1;
    if (s < 1e-3) below_1e3_ += 1;
    if (!(s > 0.0) || !std::isfinite(s)) {
      counts_[s <= 0.0 ? 0 : static_cast<size_t>(kBins - 1)] += 1;
      continue;
    }
    const double pos =
        (std::log10(s) - kDecadeLo) * kBinsPerDecade;  // [lo, hi) -> bin
    if (pos < 0.0) {
      counts_[0] += 1;
    } else if (pos >= kInnerBins) {
      counts_[static_cast<size_t>(kBins - 1)] += 1;
    } else {
      counts_[static_cast<size_t>(pos) + 1] += 1;
    }
  }
}

void SigmaHistogram::reset() {
  counts_.fill(0);
  total_ = 0;
  below_1e3_ = 0;
}

double SigmaHistogram::fraction_below(double threshold) const {
  if (total_ == 0) return 0.0;
  if (threshold == 1e-3)
    return static_cast<double>(below_1e3_) / static_cast<double>(total_);
  // Approximate from bins for other thresholds.
  const double pos = (std::log10(threshold) - kDecadeLo) * kBinsPerDecade;
  std::uint64_t acc = counts_[0];
  for (int b = 0; b < std::min<int>(kInnerBins, std::max(0, int(pos))); ++b)
    acc += counts_[static_cast<size_t>(b) + 1];
  return static_cast<double>(acc) / static_cast<double>(total_);
}

double SigmaHistogram::bin_lower_edge(int inner_bin) {
  return std::pow(10.0, kDecadeLo +
                            static_cast<double>(inner_bin) / kBinsPerDecade);
}

void MeanHistogram::observe(const Mat& mu) {
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double m = mu(i);
    total_ += 1;
    int b = static_cast<int>(m * kBins);
    b = std::clamp(b, 0, kBins - 1);
    counts_[static_cast<size_t>(b)] += 1;
  }
}

void MeanHistogram::reset() {
  counts_.fill(0);
  total_ = 0;
}

void DecoderStats::observe(const DiagGaussian& dist) {
  sigma.observe(dist.sigma.value());
  mean.observe(dist.mu.value());
}

void DecoderStats::reset() {
  sigma.reset();
  mean.reset();
}

UnbalanceRecord record_terms(const BoundTerms& terms, int epoch) {
  UnbalanceRecord r;
  r.epoch = epoch;
  r.abs_reconstruction = std::abs(terms.reconstruction);
  r.abs_divergence = std::abs(terms.divergence);
  r.ratio = r.abs_reconstruction / std::max(r.abs_divergence, 1e-12);
  r.any_nonfinite = !std::isfinite(terms.total) ||
                    !std::isfinite(terms.reconstruction) ||
                    !std::isfinite(terms.divergence);
  return r;
}

std::string histogram_csv(const DecoderStats& stats) {
  std::ostringstream os;
  os << "kind,bin,lower_edge,count\n";
  os << "sigma,underflow,0," << stats.sigma.counts()[0] << "\n";
  for (int b = 0; b < SigmaHistogram::kInnerBins; ++b)
    os << "sigma," << b << "," << SigmaHistogram::bin_lower_edge(b) << ","
       << stats.sigma.counts()[static_cast<size_t>(b) + 1] << "\n";
  os << "sigma,overflow," << SigmaHistogram::bin_lower_edge(
                                 SigmaHistogram::kInnerBins)
     << "," << stats.sigma.counts()[SigmaHistogram::kBins - 1] << "\n";
  for (int b = 0; b < MeanHistogram::kBins; ++b)
    os << "mean," << b << "," << static_cast<double>(b) / MeanHistogram::kBins
       << "," << stats.mean.counts()[static_cast<size_t>(b)] << "\n";
  return os.str();
}

}  // namespace ivae
