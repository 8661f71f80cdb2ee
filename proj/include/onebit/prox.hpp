#pragma once

#include <vector>

#include <Eigen/Dense>

namespace onebit {

/// Signed permutation P with P z = |z| sorted nonincreasingly.
///
/// Ties in |z| keep their original index order, which makes every prox in
/// this header a deterministic selection from its set-valued map. A zero
/// entry gets sign +1.
class SignedPermutation {
 public:
  explicit SignedPermutation(const Eigen::VectorXd& z);

  /// P z: the sorted magnitudes.
  Eigen::VectorXd apply(const Eigen::VectorXd& z) const;
  /// P^T y: scatter sorted-order values back with their signs.
  Eigen::VectorXd restore(const Eigen::VectorXd& y) const;

  const std::vector<Eigen::Index>& order() const { return order_; }
  const Eigen::VectorXd& signs() const { return signs_; }

 private:
  std::vector<Eigen::Index> order_;
  Eigen::VectorXd signs_;
};

/// chi_j(y) = ||y^{j}|| - ||y^{j-1}|| for a nonincreasing nonnegative y,
/// with j one-based as in [n]. Throws std::out_of_range for j outside [1, n].
double chi(const Eigen::VectorXd& y_sorted, Eigen::Index j);

/// One minimizer of 0.5||x - z||^2 + nu ||x||_0 over the unit sphere.
/// z = 0 yields e^1.
Eigen::VectorXd prox_znorm_sphere(const Eigen::VectorXd& z, double nu);

/// One nearest point of the nonnegative part of the unit sphere.
/// When no entry is positive, the coordinate vector of the first maximal entry.
Eigen::VectorXd project_sphere_nonneg(const Eigen::VectorXd& y);

/// One minimizer of 0.5||x - z||^2 + nu ||x||_1 over the unit sphere.
Eigen::VectorXd prox_l1_sphere(const Eigen::VectorXd& z, double nu);

}  // namespace onebit
