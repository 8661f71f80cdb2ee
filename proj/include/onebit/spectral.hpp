#pragma once

#include <Eigen/Dense>

namespace onebit {

/// Upper estimate of ||A||_2^2 by power iteration on A^T A.
///
/// Iterates from a fixed pseudo-random start until the Rayleigh quotient
/// changes by less than 1e-10 relatively (or 500 iterations), then inflates
/// the result by 1% so that it bounds the true value with high confidence.
/// Throws ValidationError for an empty or all-zero matrix.
double estimate_spectral_norm_sq(const Eigen::MatrixXd& a);

inline constexpr double kSpectralInflation = 1.01;
inline constexpr int kPowerIterationMax = 500;
inline constexpr double kPowerIterationTol = 1e-10;

}  // namespace onebit
