#include "ivae/adam.hpp"

#include <cmath>

namespace ivae {

AdamState::AdamState(const VaeParams& params, double learning_rate)
    : lr(learning_rate) {
  m.reserve(params.values.size());
  v.reserve(params.values.size());
  for (const Mat& p : params.values) {
    m.push_back(Mat::Zero(p.rows(), p.cols()));
    v.push_back(Mat::Zero(p.rows(), p.cols()));
  }
}

void adam_step(AdamState& state, VaeParams& params,
               const std::vector<Mat>& grads) {
  const size_t n = params.values.size();
  if (grads.size() != n || state.m.size() != n)
    throw std::invalid_argument("adam_step: size mismatch");
  for (size_t i = 0; i < n; ++i) {
    if (grads[i].rows() != params.values[i].rows() ||
        grads[i].cols() != params.values[i].cols())
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    if (!grads[i].allFinite())
      throw NonFiniteGradient("non-finite gradient in block " +
                              params.names[i]);
  }
  double scale = 1.0;
  if (state.clip_norm > 0.0) {
    double sq = 0.0;
    for (const Mat& g : grads) sq += g.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > state.clip_norm) scale = state.clip_norm / norm;
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < n; ++i) {
    Mat g = scale * grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] +
                 (1.0 - state.beta2) * g.cwiseProduct(g);
    Mat mhat = state.m[i] / bc1;
    Mat vhat = state.v[i] / bc2;
    params.values[i].array() -=
        state.lr * mhat.array() / (vhat.array().sqrt() + state.eps);
  }
}

}  // namespace ivae
