#include "onebit/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace onebit {

using Eigen::Index;
using Eigen::VectorXd;

namespace {

VectorXd unit(Index n, Index i, double sign = 1.0) {
  VectorXd e = VectorXd::Zero(n);
  e[i] = sign;
  return e;
}

}  // namespace

SignedPermutation::SignedPermutation(const VectorXd& z) : order_(z.size()), signs_(z.size()) {
  std::iota(order_.begin(), order_.end(), Index{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&z](Index i, Index j) { return std::abs(z[i]) > std::abs(z[j]); });
  for (Index i = 0; i < z.size(); ++i) signs_[i] = z[i] < 0.0 ? -1.0 : 1.0;
}

VectorXd SignedPermutation::apply(const VectorXd& z) const {
  VectorXd y(z.size());
  for (std::size_t k = 0; k < order_.size(); ++k) {
    const Index i = order_[k];
    y[static_cast<Index>(k)] = signs_[i] * z[i];
  }
  return y;
}

VectorXd SignedPermutation::restore(const VectorXd& y) const {
  VectorXd x(y.size());
  for (std::size_t k = 0; k < order_.size(); ++k) {
    const Index i = order_[k];
    x[i] = signs_[i] * y[static_cast<Index>(k)];
  }
  return x;
}

double chi(const VectorXd& y_sorted, Index j) {
  if (j < 1 || j > y_sorted.size()) {
    throw std::out_of_range("chi: index " + std::to_string(j) + " outside [1, " +
                            std::to_string(y_sorted.size()) + "]");
  }
  const double head = y_sorted.head(j - 1).norm();
  const double yj = y_sorted[j - 1];
  const double full = std::sqrt(head * head + yj * yj);
  // ||y^j|| - ||y^{j-1}|| written without cancellation.
  return full + head == 0.0 ? 0.0 : yj * yj / (full + head);
}

VectorXd prox_znorm_sphere(const VectorXd& z, double nu) {
  const Index n = z.size();
  const SignedPermutation perm(z);
  const VectorXd y = perm.apply(z);
  if (n == 0 || y[0] == 0.0) return unit(n, 0);

  // chi_j is nonincreasing in j, so the kept count is the last j with
  // chi_j >= nu, and at least one. Zero tail entries have chi_j = 0 < nu.
  Index keep = 1;
  double prev = y[0];
  for (Index j = 1; j < n; ++j) {
    const double full = std::sqrt(prev * prev + y[j] * y[j]);
    const double chi_j = y[j] * y[j] / (full + prev);
    if (chi_j < nu) break;
    keep = j + 1;
    prev = full;
  }

  VectorXd sorted = VectorXd::Zero(n);
  sorted.head(keep) = y.head(keep);
  sorted /= sorted.norm();
  VectorXd x = perm.restore(sorted);
  x /= x.norm();
  return x;
}

VectorXd project_sphere_nonneg(const VectorXd& y) {
  const Index n = y.size();
  VectorXd x = y.cwiseMax(0.0);
  const double norm = x.norm();
  if (norm == 0.0) {
    Index best = 0;
    for (Index i = 1; i < n; ++i) {
      if (y[i] > y[best]) best = i;
    }
    return unit(n, best);
  }
  x /= norm;
  x /= x.norm();
  return x;
}

VectorXd prox_l1_sphere(const VectorXd& z, double nu) {
  const SignedPermutation perm(z);
  const VectorXd shifted = perm.apply(z).array() - nu;
  VectorXd x = perm.restore(project_sphere_nonneg(shifted));
  x /= x.norm();
  return x;
}

}  // namespace onebit
