#pragma once

#include <functional>
#include <random>
#include <vector>

#include "ivae/gaussian.hpp"

// The three training objectives. Inputs are batched column-wise: x is
// n x B, q is the encoder output for x, decode maps a latent batch k x B to
// the decoder distribution over pixels. Reported terms are batch means.

namespace ivae {

enum class BoundKind { Elbo, Ielbo, Irelbo };

struct BoundConfig {
  BoundKind kind = BoundKind::Ielbo;
  double epsilon = 0.01;  // interval HALF-width; the box is [x-eps, x+eps]
  double alpha = 1.5;     // Renyi order, in (1, 2)
  int mc_samples = 1;
};

struct BoundTerms {
  double reconstruction = 0.0;
  double divergence = 0.0;
  double total = 0.0;
  std::vector<double> per_sample_log_weights;  // IRELBO log h, sample-major
  Tensor objective;  // tracked scalar equal to `total`, for backprop
};

using DecodeFn = std::function<DiagGaussian(const Tensor& z)>;

// `noise` carries cfg.mc_samples standard-normal draws, each k x B.
BoundTerms elbo(const Mat& x, const DiagGaussian& q, const DecodeFn& decode,
                const BoundConfig& cfg, const std::vector<Mat>& noise);
BoundTerms ielbo(const Mat& x, const DiagGaussian& q, const DecodeFn& decode,
                 const BoundConfig& cfg, const std::vector<Mat>& noise);
BoundTerms irelbo(const Mat& x, const DiagGaussian& q, const DecodeFn& decode,
                  const BoundConfig& cfg, const std::vector<Mat>& noise);

// Dispatch on cfg.kind.
BoundTerms evaluate_bound(const Mat& x, const DiagGaussian& q,
                          const DecodeFn& decode, const BoundConfig& cfg,
                          const std::vector<Mat>& noise);

// Monte-Carlo estimate of log int_{x-eps}^{x+eps} p(x) dx by sampling the
// standard-normal prior; x is a single example (n x 1). The log of the
// unbiased mean is reported together with a delta-method standard error.
struct McEvidence {
  double log_evidence;
  double std_error;
};
McEvidence mc_log_interval_evidence(const Mat& x, const DecodeFn& decode,
                                    int latent_dim, double epsilon,
                                    int n_draws, std::mt19937_64& rng);

}  // namespace ivae
