#pragma once

#include <span>

// Scalar kernels for Gaussian interval likelihoods and the inverse-power
// interval integral. All functions are pure and thread-safe.

namespace ivae::special {

// Error function and complement. Total functions of a finite argument.
double erf(double x);
double erfc(double x);

// Scaled complement exp(x^2) * erfc(x) for x >= 0. Stays representable in
// the deep tail where erfc underflows.
double erfcx(double x);

// Dawson integral D(x) = exp(-x^2) * int_0^x exp(t^2) dt. Odd, bounded.
double dawson(double x);

// log( int_0^x exp(t^2) dt ) for x > 0, i.e. log(exp(x^2) * D(x)) without
// forming the overflowing product. Valid for x well past 26 where exp(x^2)
// exceeds the double range.
double log_exp_scaled_dawson(double x);

// log P(a < X < b) for X ~ N(mu, sigma^2). Tail-stable: when both
// standardized endpoints share a sign the difference of CDFs is evaluated
// through scaled complementary error functions in log space.
// Throws std::invalid_argument for sigma <= 0 or a >= b.
double log_gauss_interval(double mu, double sigma, double a, double b);

// Same value plus analytic d/dmu and d/dsigma.
double log_gauss_interval_grad(double mu, double sigma, double a, double b,
                               double* d_mu, double* d_sigma);

// log( int_a^b N(x; mu, sigma^2)^((1-alpha)/(2-alpha)) dx ) for
// 1 < alpha < 2, via the Dawson-integral closed form. The exp(x^2)*D(x)
// terms never leave the log domain.
double log_inverse_power_gauss_interval(double mu, double sigma, double a,
                                        double b, double alpha);

double log_inverse_power_gauss_interval_grad(double mu, double sigma, double a,
                                             double b, double alpha,
                                             double* d_mu, double* d_sigma);

// log sum_i exp(xs[i]); shift-exact, -inf entries are absorbing-neutral.
// Throws on empty input.
double log_sum_exp(std::span<const double> xs);

}  // namespace ivae::special
