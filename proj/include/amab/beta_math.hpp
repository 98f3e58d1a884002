#pragma once

#include <span>

namespace amab {

// Regularized incomplete beta I_x(a, b), i.e. the Beta(a, b) CDF.
double beta_cdf(double x, double a, double b);

// Inverse of beta_cdf in x.
double beta_quantile(double a, double b, double p);

// Probability that each arm's Beta(alpha_k, beta_k) draw is the largest.
// Computed by 64-point Gauss-Legendre quadrature of pdf_i * prod_j cdf_j over
// [0, 1], which is exact for integer parameters with total sum(alpha+beta) up
// to about 128. Per-arm node values are memoized per thread.
void beta_argmax_probabilities(std::span<const double> alpha, std::span<const double> beta,
                               std::span<double> out);

// Same for the mean of n independent draws per arm, approximating that mean
// by a moment-matched Beta and integrating on a fixed 1024-cell grid.
void beta_mean_argmax_probabilities(std::span<const double> alpha,
                                    std::span<const double> beta, int n_draws,
                                    std::span<double> out);

// Softmax with max subtraction. inverse_temperature multiplies the values.
void softmax(std::span<const double> values, double inverse_temperature, std::span<double> out);

}  // namespace amab
