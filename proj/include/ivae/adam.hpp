#pragma once

#include <stdexcept>
#include <vector>

#include "ivae/model.hpp"

namespace ivae {

// Thrown when a step receives non-finite gradient entries; carries the
// offending block name so the trainer can dump a diagnostic.
struct NonFiniteGradient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdamState {
  std::int64_t step = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0.0;  // 0 disables clipping
  std::vector<Mat> m;
  std::vector<Mat> v;

  AdamState() = default;
  AdamState(const VaeParams& params, double learning_rate);
};

// Standard bias-corrected Adam, applied as DESCENT on the supplied
// gradients; the trainer maximizes a bound by passing the gradient of its
// negation. Throws NonFiniteGradient without touching params or state.
void adam_step(AdamState& state, VaeParams& params,
               const std::vector<Mat>& grads);

}  // namespace ivae
