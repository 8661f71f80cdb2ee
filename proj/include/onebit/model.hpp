#pragma once

#include <limits>
#include <optional>

#include <Eigen/Dense>

namespace onebit {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Tolerance on | ||x|| - 1 | for the sphere indicator in objective evaluation.
inline constexpr double kSphereTolerance = 1e-9;

enum class SurrogateKind { Scad, Mcp };

/// Scalar knobs of the loss and regularizer.
///
/// sigma caps the penalty charged to a flipped sign, gamma is the width of
/// the quadratic blends smoothing the DC loss, lambda weights sparsity, and
/// rho and a shape the SCAD/MCP surrogate of the zero-norm.
struct ModelParams {
  double sigma = 0.8;
  double gamma = 0.05;
  double lambda = 8.0;
  double rho = 10.0;
  double a = 3.7;
  SurrogateKind surrogate = SurrogateKind::Scad;

  /// Throws ValidationError unless 0 < gamma < sigma/2, lambda, rho > 0 and
  /// a > 1 (SCAD) or a > 2 (MCP).
  void validate() const;
};

struct ValueAndSlope {
  double value;
  double derivative;
};

/// Nonsmooth DC loss: max(0, -t) for t >= -sigma, sigma below.
double dc_loss(double t, double sigma);

/// Five-branch C^1 smoothing of dc_loss and its derivative.
ValueAndSlope smooth_loss(double t, double sigma, double gamma);

/// Conjugate psi* of the SCAD or MCP generating function, with its
/// derivative. Throws ValidationError for a <= 1 (SCAD) or a <= 2 (MCP).
ValueAndSlope conjugate(double omega, double a, SurrogateKind kind);

/// Lipschitz modulus of the gradient of theta_rho(x) = rho^-1 sum psi*(rho|x_i|).
double theta_gradient_lipschitz(const ModelParams& p);

/// Measurement data. A = Diag(b) Phi is formed once at construction along
/// with its transpose and an upper estimate of ||A||^2. Immutable afterwards.
class Problem {
 public:
  /// Throws ValidationError when b is not a +-1 vector of length rows(phi),
  /// when x_true has the wrong length or is off the unit sphere, or when A
  /// is zero.
  Problem(MatrixXd phi, VectorXd b, std::optional<VectorXd> x_true = std::nullopt);

  Index rows() const { return phi_.rows(); }
  Index cols() const { return phi_.cols(); }

  const MatrixXd& phi() const { return phi_; }
  const VectorXd& b() const { return b_; }
  const MatrixXd& a_mat() const { return a_; }
  const std::optional<VectorXd>& x_true() const { return x_true_; }
  double spectral_norm_sq() const { return spectral_norm_sq_; }
  /// Wall time spent estimating ||A||^2 at construction.
  double spectral_seconds() const { return spectral_seconds_; }

  /// A x, skipping zero entries of x when x is sparse.
  VectorXd apply(const VectorXd& x) const;
  /// A^T d, skipping zero entries of d when d is sparse.
  VectorXd apply_transpose(const VectorXd& d) const;

 private:
  MatrixXd phi_;
  VectorXd b_;
  MatrixXd a_;
  MatrixXd a_t_;
  std::optional<VectorXd> x_true_;
  double spectral_norm_sq_ = 0.0;
  double spectral_seconds_ = 0.0;
};

struct ValueAndGradient {
  double value;
  VectorXd gradient;
};

/// Sum of smooth_loss over the residuals ax; fills derivative(i) when given.
double smooth_loss_sum(const VectorXd& ax, const ModelParams& p, VectorXd* derivative = nullptr);

/// f(x) = L_{sigma,gamma}(Ax) and its gradient A^T d.
ValueAndGradient smooth_loss_and_grad(const VectorXd& x, const Problem& prob,
                                      const ModelParams& p);

/// Lipschitz bound ||A||^2 / gamma of the smooth loss gradient.
double smooth_loss_lipschitz(const Problem& prob, const ModelParams& p);

/// value = lambda * rho * phi_rho(x); gradient holds grad theta_rho(x),
/// i.e. (psi*)'(rho|x_i|) sign(x_i) with sign(0) = 0.
ValueAndGradient surrogate_penalty(const VectorXd& x, const ModelParams& p);

/// Xi(x) = f(x) - lambda rho theta_rho(x), the smooth part of G.
ValueAndGradient surrogate_smooth_part(const VectorXd& x, const Problem& prob,
                                       const ModelParams& p);

/// Lipschitz bound of grad Xi: ||A||^2/gamma + lambda rho * Lip(grad theta_rho).
double surrogate_smooth_lipschitz(const Problem& prob, const ModelParams& p);

bool on_sphere(const VectorXd& x, double tol = kSphereTolerance);

/// Number of entries with x_i != 0 exactly.
Index count_nonzeros(const VectorXd& x);

enum class Objective { F, G };

/// F(x) = L(Ax) + delta_S(x) + lambda ||x||_0; +inf off the sphere.
double objective_f(const VectorXd& x, const Problem& prob, const ModelParams& p);
/// G(x) = L(Ax) + delta_S(x) + lambda rho phi_rho(x); +inf off the sphere.
double objective_g(const VectorXd& x, const Problem& prob, const ModelParams& p);
double objective(Objective which, const VectorXd& x, const Problem& prob, const ModelParams& p);

/// Objective at x plus (varsigma / (4 tau)) ||x - u||^2.
double potential(const VectorXd& x, const VectorXd& u, const Problem& prob, const ModelParams& p,
                 double tau, double varsigma, Objective which);

}  // namespace onebit
