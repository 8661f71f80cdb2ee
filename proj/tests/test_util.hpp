#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "onebit/model.hpp"

namespace testutil {

using onebit::MatrixXd;
using onebit::VectorXd;

inline onebit::Problem random_problem(int m, int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  MatrixXd phi(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) phi(i, j) = normal(gen);
  VectorXd b(m);
  for (int i = 0; i < m; ++i) b[i] = (gen() & 1) ? 1.0 : -1.0;
  return onebit::Problem(phi, b);
}

inline VectorXd random_unit(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = normal(gen);
  return x / x.norm();
}

struct GradientCheck {
  int points = 0;
  int rejected = 0;
  double worst_rel_error = 0.0;
};

// Distance of t to the nearest breakpoint of the smoothed loss.
inline double loss_margin(double t, const onebit::ModelParams& p) {
  double d = std::abs(t);
  for (double bp : {-p.gamma, -p.sigma + p.gamma, -(p.sigma + p.gamma)}) {
    d = std::min(d, std::abs(t - bp));
  }
  return d;
}

// Distance of rho|x_i| to the SCAD conjugate breakpoints, and of x_i to 0.
inline double penalty_margin(double xi, const onebit::ModelParams& p) {
  const double w = p.rho * std::abs(xi);
  double d = std::abs(xi);
  d = std::min(d, std::abs(w - 2.0 / (p.a + 1.0)));
  d = std::min(d, std::abs(w - 2.0 * p.a / (p.a + 1.0)));
  return d;
}

// Compares the analytic gradient of f (surrogate = false) or Xi (true) with
// central differences, h = 1e-6, at `points` random unit vectors whose
// residuals all sit at least 1e-3 away from a breakpoint. Relative error is
// ||g - g_fd|| / max(||g||, 1).
inline GradientCheck check_gradients(bool surrogate, int m, int n, int points,
                                     std::uint64_t seed) {
  const onebit::Problem prob = random_problem(m, n, seed);
  onebit::ModelParams p;
  p.lambda = 4.0;
  std::mt19937_64 gen(seed * 7919 + 1);
  constexpr double kMargin = 1e-3;
  constexpr double kH = 1e-6;

  auto eval = [&](const VectorXd& x) {
    return surrogate ? onebit::surrogate_smooth_part(x, prob, p)
                     : onebit::smooth_loss_and_grad(x, prob, p);
  };

  GradientCheck out;
  while (out.points < points) {
    const VectorXd x = random_unit(n, gen);
    const VectorXd ax = prob.a_mat() * x;
    bool ok = true;
    for (int i = 0; i < m && ok; ++i) ok = loss_margin(ax[i], p) > kMargin;
    if (surrogate) {
      for (int i = 0; i < n && ok; ++i) ok = penalty_margin(x[i], p) > kMargin;
    }
    if (!ok) {
      ++out.rejected;
      continue;
    }
    const VectorXd g = eval(x).gradient;
    VectorXd fd(n);
    for (int j = 0; j < n; ++j) {
      VectorXd xp = x, xm = x;
      xp[j] += kH;
      xm[j] -= kH;
      fd[j] = (eval(xp).value - eval(xm).value) / (2 * kH);
    }
    const double rel = (g - fd).norm() / std::max(g.norm(), 1.0);
    out.worst_rel_error = std::max(out.worst_rel_error, rel);
    ++out.points;
  }
  return out;
}

}  // namespace testutil
