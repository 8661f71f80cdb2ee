#include "onebit/spectral.hpp"

#include <cmath>

#include "onebit/errors.hpp"
#include "onebit/rng.hpp"

namespace onebit {

double estimate_spectral_norm_sq(const Eigen::MatrixXd& a) {
  if (a.size() == 0) throw ValidationError("spectral norm: empty matrix");

  // Fixed seed: the estimate must be reproducible run to run.
  Rng rng(0x5eed, Stream::Internal);
  Eigen::VectorXd v(a.cols());
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = rng.normal();
  v.normalize();

  double quotient = 0.0;
  for (int it = 0; it < kPowerIterationMax; ++it) {
    const Eigen::VectorXd w = a * v;
    const double next = w.squaredNorm();
    Eigen::VectorXd u = a.transpose() * w;
    const double unorm = u.norm();
    if (unorm == 0.0) {
      if (it == 0 && next == 0.0 && a.cwiseAbs().maxCoeff() == 0.0) {
        throw ValidationError("spectral norm: zero matrix");
      }
      // v fell into the null space; the last quotient stands.
      quotient = std::max(quotient, next);
      break;
    }
    v = u / unorm;
    const bool converged = it > 0 && std::abs(next - quotient) < kPowerIterationTol * next;
    quotient = next;
    if (converged) break;
  }
  if (quotient == 0.0) throw ValidationError("spectral norm: zero matrix");
  return kSpectralInflation * quotient;
}

}  // namespace onebit
