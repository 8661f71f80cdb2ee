#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "onebit/prox.hpp"

namespace proxoracle {

using Eigen::VectorXd;

inline double znorm_objective(const VectorXd& x, const VectorXd& z, double nu) {
  return 0.5 * (x - z).squaredNorm() + nu * static_cast<double>((x.array() != 0.0).count());
}

inline double l1_objective(const VectorXd& x, const VectorXd& z, double nu) {
  return 0.5 * (x - z).squaredNorm() + nu * x.lpNorm<1>();
}

// Exhaustive minimum over supports: on a fixed support S the best unit
// vector is z_S / ||z_S||, or any unit vector on S when z_S = 0.
inline double znorm_enumeration_min(const VectorXd& z, double nu) {
  const int n = static_cast<int>(z.size());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    VectorXd x = VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) x[i] = z[i];
    }
    const double norm = x.norm();
    if (norm == 0.0) {
      for (int i = 0; i < n; ++i) {
        if (mask & (1u << i)) {
          x[i] = 1.0;
          break;
        }
      }
    } else {
      x /= norm;
    }
    best = std::min(best, znorm_objective(x, z, nu));
  }
  return best;
}

struct ZnormResult {
  int cases = 0;
  double worst_gap = 0.0;
};

// |objective(prox) - enumeration minimum| over random z with n in [1, max_n]
// and nu log-uniform in [1e-3, 3].
inline ZnormResult znorm_oracle_check(int cases, int max_n, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(std::log(1e-3), std::log(3.0));
  ZnormResult out;
  for (int c = 0; c < cases; ++c) {
    const int n = 1 + static_cast<int>(gen() % static_cast<unsigned>(max_n));
    VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = normal(gen);
    if (c % 10 == 0) z[static_cast<int>(gen() % n)] = 0.0;
    const double nu = std::exp(unif(gen));
    const VectorXd x = onebit::prox_znorm_sphere(z, nu);
    const double gap = std::abs(znorm_objective(x, z, nu) - znorm_enumeration_min(z, nu));
    out.worst_gap = std::max(out.worst_gap, gap);
    ++out.cases;
  }
  return out;
}

struct L1Result {
  int cases = 0;
  // min over cases of (best grid objective - prox objective); >= 0 means the
  // prox is never beaten by the grid.
  double worst_margin = std::numeric_limits<double>::infinity();
};

// Grid over the unit circle (n = 2) or a Fibonacci lattice on the unit
// sphere (n = 3) with `points` nodes.
inline double l1_grid_min(const VectorXd& z, double nu, int points) {
  double best = std::numeric_limits<double>::infinity();
  VectorXd x(z.size());
  if (z.size() == 2) {
    for (int k = 0; k < points; ++k) {
      const double t = 2.0 * std::numbers::pi * k / points;
      x << std::cos(t), std::sin(t);
      best = std::min(best, l1_objective(x, z, nu));
    }
  } else {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < points; ++k) {
      const double y = 1.0 - 2.0 * (k + 0.5) / points;
      const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
      const double phi = golden * k;
      x << r * std::cos(phi), y, r * std::sin(phi);
      best = std::min(best, l1_objective(x, z, nu));
    }
  }
  return best;
}

inline L1Result l1_grid_check(int n, int cases, int points, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.01, 2.0);
  L1Result out;
  for (int c = 0; c < cases; ++c) {
    VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = 2.0 * normal(gen);
    const double nu = unif(gen);
    const VectorXd x = onebit::prox_l1_sphere(z, nu);
    out.worst_margin = std::min(out.worst_margin, l1_grid_min(z, nu, points) - l1_objective(x, z, nu));
    ++out.cases;
  }
  return out;
}

}  // namespace proxoracle
