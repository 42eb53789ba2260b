#pragma once

#include "ivae/tensor.hpp"

// Diagonal Gaussians over columns: mu and sigma are d x B, one distribution
// per column. Row-vector results (1 x B) carry one value per example; the
// B = 1 case is the plain scalar contract.

namespace ivae {

struct DiagGaussian {
  Tensor mu;
  Tensor sigma;  // entrywise > 0
};

struct Box {
  Mat lo;
  Mat hi;  // lo < hi elementwise, same shape as the distribution
};

// Builds the interval box [x - eps, x + eps] around a batch of inputs.
Box box_around(const Mat& x, double epsilon);

// mu + sigma .* noise; differentiable in mu and sigma.
Tensor sample_reparam(const DiagGaussian& g, const Mat& noise);

// Per-column KL(N(mu, sigma^2) || N(0, I)) as a 1 x B row.
Tensor kl_to_std_normal(const DiagGaussian& g);

// Per-column sum_j log P(lo_j < X_j < hi_j) under the diagonal Gaussian,
// as a 1 x B row. Gradients use the Gaussian density at the endpoints
// against the log-domain interval probability.
Tensor log_interval_likelihood(const DiagGaussian& g, const Box& box);

// Per-column sum_j log int_{lo_j}^{hi_j} N(x; mu_j, sigma_j^2)^((1-a)/(2-a)) dx.
Tensor log_inv_power_interval(const DiagGaussian& g, const Box& box,
                              double alpha);

// Per-column sum_j log N(x_j; mu_j, sigma_j^2); differentiable in x, mu and
// sigma (x may be a reparameterized sample).
Tensor gauss_log_density(const Tensor& x, const DiagGaussian& g);

}  // namespace ivae
