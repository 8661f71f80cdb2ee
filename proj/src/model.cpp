#include "onebit/model.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <utility>

#include "onebit/errors.hpp"
#include "onebit/spectral.hpp"

namespace onebit {

namespace {

// Below this fill ratio the matrix-vector products gather columns instead
// of running the dense kernel.
constexpr double kSparseFill = 0.25;

double sign0(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

VectorXd sparse_aware_product(const MatrixXd& mat, const VectorXd& v) {
  const Index nnz = count_nonzeros(v);
  if (static_cast<double>(nnz) >= kSparseFill * static_cast<double>(v.size())) {
    return mat * v;
  }
  VectorXd out = VectorXd::Zero(mat.rows());
  for (Index j = 0; j < v.size(); ++j) {
    if (v[j] != 0.0) out.noalias() += v[j] * mat.col(j);
  }
  return out;
}

}  // namespace

void ModelParams::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("model parameters: " + msg); };
  if (!(sigma > 0.0)) fail("sigma must be positive");
  if (!(gamma > 0.0) || !(gamma < sigma / 2.0)) fail("gamma must lie in (0, sigma/2)");
  if (!(lambda > 0.0)) fail("lambda must be positive");
  if (!(rho > 0.0)) fail("rho must be positive");
  if (surrogate == SurrogateKind::Scad && !(a > 1.0)) fail("SCAD requires a > 1");
  if (surrogate == SurrogateKind::Mcp && !(a > 2.0)) fail("MCP requires a > 2");
}

double dc_loss(double t, double sigma) {
  if (t >= -sigma) return std::max(0.0, -t);
  return sigma;
}

ValueAndSlope smooth_loss(double t, double sigma, double gamma) {
  if (t > 0.0) return {0.0, 0.0};
  if (t > -gamma) return {t * t / (2.0 * gamma), t / gamma};
  if (t > -sigma + gamma) return {-t - gamma / 2.0, -1.0};
  if (t >= -(sigma + gamma)) {
    const double s = t + sigma + gamma;
    return {sigma - gamma / 2.0 - s * s / (4.0 * gamma), -s / (2.0 * gamma)};
  }
  return {sigma - gamma / 2.0, 0.0};
}

ValueAndSlope conjugate(double omega, double a, SurrogateKind kind) {
  if (kind == SurrogateKind::Scad) {
    if (!(a > 1.0)) throw ValidationError("SCAD conjugate requires a > 1");
    const double lo = 2.0 / (a + 1.0);
    const double hi = 2.0 * a / (a + 1.0);
    if (omega <= lo) return {0.0, 0.0};
    if (omega <= hi) {
      const double s = (a + 1.0) * omega - 2.0;
      return {s * s / (4.0 * (a * a - 1.0)), s / (2.0 * (a - 1.0))};
    }
    return {omega - 1.0, 1.0};
  }
  if (!(a > 2.0)) throw ValidationError("MCP conjugate requires a > 2");
  const double offset = (a - 2.0) * (a - 2.0) / 4.0;
  if (omega <= a - a * a / 2.0) return {-offset, 0.0};
  if (omega <= a) {
    const double s = a * (a - 2.0) / 2.0 + omega;
    return {s * s / (a * a) - offset, 2.0 * s / (a * a)};
  }
  return {omega - 1.0, 1.0};
}

double theta_gradient_lipschitz(const ModelParams& p) {
  if (p.surrogate == SurrogateKind::Scad) {
    return p.rho * std::max((p.a + 1.0) / 2.0, (p.a + 1.0) / (2.0 * (p.a - 1.0)));
  }
  return 2.0 * p.rho / (p.a * p.a);
}

Problem::Problem(MatrixXd phi, VectorXd b, std::optional<VectorXd> x_true)
    : phi_(std::move(phi)), b_(std::move(b)), x_true_(std::move(x_true)) {
  if (phi_.rows() == 0 || phi_.cols() == 0) throw ValidationError("problem: empty matrix");
  if (b_.size() != phi_.rows()) {
    std::ostringstream os;
    os << "problem: b has " << b_.size() << " entries but phi has " << phi_.rows() << " rows";
    throw ValidationError(os.str());
  }
  for (Index i = 0; i < b_.size(); ++i) {
    if (b_[i] != 1.0 && b_[i] != -1.0) {
      std::ostringstream os;
      os << "problem: b[" << i << "] = " << b_[i] << " is not +1 or -1";
      throw ValidationError(os.str());
    }
  }
  if (x_true_) {
    if (x_true_->size() != phi_.cols()) throw ValidationError("problem: x_true has wrong length");
    if (std::abs(x_true_->norm() - 1.0) > 1e-12) {
      throw ValidationError("problem: x_true is not a unit vector");
    }
  }
  a_ = b_.asDiagonal() * phi_;
  a_t_ = a_.transpose();
  const auto start = std::chrono::steady_clock::now();
  spectral_norm_sq_ = estimate_spectral_norm_sq(a_);
  spectral_seconds_ =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

VectorXd Problem::apply(const VectorXd& x) const {
  if (x.size() != cols()) throw ValidationError("problem: dimension mismatch in A x");
  return sparse_aware_product(a_, x);
}

VectorXd Problem::apply_transpose(const VectorXd& d) const {
  if (d.size() != rows()) throw ValidationError("problem: dimension mismatch in A^T d");
  return sparse_aware_product(a_t_, d);
}

double smooth_loss_sum(const VectorXd& ax, const ModelParams& p, VectorXd* derivative) {
  if (derivative) derivative->resize(ax.size());
  double total = 0.0;
  for (Index i = 0; i < ax.size(); ++i) {
    const ValueAndSlope v = smooth_loss(ax[i], p.sigma, p.gamma);
    total += v.value;
    if (derivative) (*derivative)[i] = v.derivative;
  }
  return total;
}

ValueAndGradient smooth_loss_and_grad(const VectorXd& x, const Problem& prob,
                                      const ModelParams& p) {
  VectorXd d;
  const double value = smooth_loss_sum(prob.apply(x), p, &d);
  return {value, prob.apply_transpose(d)};
}

double smooth_loss_lipschitz(const Problem& prob, const ModelParams& p) {
  return prob.spectral_norm_sq() / p.gamma;
}

ValueAndGradient surrogate_penalty(const VectorXd& x, const ModelParams& p) {
  double l1 = 0.0;
  double conj = 0.0;
  VectorXd grad(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double mag = std::abs(x[i]);
    const ValueAndSlope c = conjugate(p.rho * mag, p.a, p.surrogate);
    l1 += mag;
    conj += c.value;
    grad[i] = c.derivative * sign0(x[i]);
  }
  return {p.lambda * p.rho * l1 - p.lambda * conj, std::move(grad)};
}

ValueAndGradient surrogate_smooth_part(const VectorXd& x, const Problem& prob,
                                       const ModelParams& p) {
  ValueAndGradient f = smooth_loss_and_grad(x, prob, p);
  double conj = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const ValueAndSlope c = conjugate(p.rho * std::abs(x[i]), p.a, p.surrogate);
    conj += c.value;
    f.gradient[i] -= p.lambda * p.rho * c.derivative * sign0(x[i]);
  }
  f.value -= p.lambda * conj;
  return f;
}

double surrogate_smooth_lipschitz(const Problem& prob, const ModelParams& p) {
  return smooth_loss_lipschitz(prob, p) + p.lambda * p.rho * theta_gradient_lipschitz(p);
}

bool on_sphere(const VectorXd& x, double tol) { return std::abs(x.norm() - 1.0) <= tol; }

Index count_nonzeros(const VectorXd& x) {
  Index count = 0;
  for (Index i = 0; i < x.size(); ++i) count += (x[i] != 0.0);
  return count;
}

double objective_f(const VectorXd& x, const Problem& prob, const ModelParams& p) {
  if (!on_sphere(x)) return kInfinity;
  return smooth_loss_sum(prob.apply(x), p) + p.lambda * static_cast<double>(count_nonzeros(x));
}

double objective_g(const VectorXd& x, const Problem& prob, const ModelParams& p) {
  if (!on_sphere(x)) return kInfinity;
  return smooth_loss_sum(prob.apply(x), p) + surrogate_penalty(x, p).value;
}

double objective(Objective which, const VectorXd& x, const Problem& prob, const ModelParams& p) {
  return which == Objective::F ? objective_f(x, prob, p) : objective_g(x, prob, p);
}

double potential(const VectorXd& x, const VectorXd& u, const Problem& prob, const ModelParams& p,
                 double tau, double varsigma, Objective which) {
  return objective(which, x, prob, p) + varsigma / (4.0 * tau) * (x - u).squaredNorm();
}

}  // namespace onebit
