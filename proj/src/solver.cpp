#include "onebit/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "onebit/errors.hpp"
#include "onebit/prox.hpp"

namespace onebit {

void SolverConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("solver config: " + msg); };
  if (!(varsigma > 0.0 && varsigma < 1.0)) fail("varsigma must lie in (0, 1)");
  if (!(tau_safety > 0.0 && tau_safety < 1.0)) fail("tau_safety must lie in (0, 1)");
  if (!(beta_cap >= 0.0 && beta_cap < 1.0)) fail("beta_cap must lie in [0, 1)");
  if (!(step_scale > 0.0)) fail("step_scale must be positive");
  if (max_iter < 1) fail("max_iter must be at least 1");
  if (!(step_tol >= 0.0)) fail("step_tol must be nonnegative");
  if (obj_window < 1) fail("obj_window must be at least 1");
  if (!(obj_rel_tol >= 0.0)) fail("obj_rel_tol must be nonnegative");
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::StepTol: return "step_tol";
    case SolveStatus::ObjPlateau: return "obj_plateau";
    case SolveStatus::MaxIter: return "max_iter";
  }
  return "unknown";
}

double BetaSchedule::next() {
  const double beta = (t_prev_ - 1.0) / t_curr_;
  const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_curr_ * t_curr_));
  t_prev_ = t_curr_;
  t_curr_ = t_next;
  return std::min(beta, cap_);
}

double beta_bound(double tau, double lipschitz, double varsigma) {
  const double inv = 1.0 / tau;
  if (!(inv > lipschitz)) return 0.0;
  return std::sqrt(varsigma * (inv - lipschitz) * inv) / (2.0 * (inv + lipschitz));
}

namespace {

// One engine for both models: the smooth part, the prox and the
// nonsmooth term differ, the loop does not.
struct Model {
  Method method;
  const Problem& prob;
  const ModelParams& p;

  // Smooth part value and gradient at x, given ax = A x.
  double smooth(const VectorXd& x, const VectorXd& ax, VectorXd& grad) const {
    VectorXd d;
    double value = smooth_loss_sum(ax, p, &d);
    grad = prob.apply_transpose(d);
    if (method == Method::Surrogate) {
      // psi*(0) = 0 for both surrogates, so zero entries contribute nothing.
      for (Index i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) continue;
        const ValueAndSlope c = conjugate(p.rho * std::abs(x[i]), p.a, p.surrogate);
        value -= p.lambda * c.value;
        grad[i] -= p.lambda * p.rho * c.derivative * (x[i] > 0.0 ? 1.0 : -1.0);
      }
    }
    return value;
  }

  // Full objective F or G at a sphere point x with ax = A x.
  double objective(const VectorXd& x, const VectorXd& ax) const {
    const double loss = smooth_loss_sum(ax, p);
    if (method == Method::Znorm) {
      return loss + p.lambda * static_cast<double>(count_nonzeros(x));
    }
    return loss + surrogate_penalty(x, p).value;
  }

  double nu(double tau) const {
    return method == Method::Znorm ? tau * p.lambda : tau * p.lambda * p.rho;
  }

  VectorXd prox(const VectorXd& z, double tau) const {
    return method == Method::Znorm ? prox_znorm_sphere(z, nu(tau)) : prox_l1_sphere(z, nu(tau));
  }

  double lipschitz() const {
    return method == Method::Znorm ? smooth_loss_lipschitz(prob, p)
                                   : surrogate_smooth_lipschitz(prob, p);
  }
};

bool plateaued(const std::vector<double>& history, int window, double tol) {
  if (static_cast<int>(history.size()) < window + 1) return false;
  const std::size_t last = history.size() - 1;
  for (int j = 0; j < window; ++j) {
    const double cur = history[last - j];
    const double prev = history[last - j - 1];
    if (std::abs(cur - prev) / std::max(1.0, std::abs(cur)) > tol) return false;
  }
  return true;
}

SolveResult run(const Model& model, const SolverConfig& cfg, const VectorXd& x0) {
  cfg.validate();
  model.p.validate();
  if (x0.size() != model.prob.cols()) throw ValidationError("solver: x0 has wrong length");
  if (!on_sphere(x0)) throw ValidationError("solver: x0 is not on the unit sphere");

  SolveResult result;
  result.lipschitz = model.lipschitz();
  result.tau = cfg.step_scale * cfg.tau_safety * (1.0 - cfg.varsigma) / result.lipschitz;
  result.beta_cap = std::min(cfg.beta_cap, beta_bound(result.tau, result.lipschitz, cfg.varsigma));
  const double tau = result.tau;
  const double weight = cfg.varsigma / (4.0 * tau);

  VectorXd x = x0;
  VectorXd x_prev = x0;
  VectorXd ax = model.prob.apply(x);
  VectorXd ax_prev = ax;
  double obj = model.objective(x, ax);
  double pot = obj;
  result.objective_history.push_back(obj);
  if (cfg.trace) result.iterates.push_back(x);

  BetaSchedule schedule(result.beta_cap);
  VectorXd grad;
  for (int k = 0; k < cfg.max_iter; ++k) {
    const double beta = schedule.next();
    const VectorXd x_tilde = x + beta * (x - x_prev);
    const VectorXd ax_tilde = ax + beta * (ax - ax_prev);
    model.smooth(x_tilde, ax_tilde, grad);
    VectorXd x_next = model.prox(x_tilde - tau * grad, tau);
    const double step = (x_next - x_tilde).norm();

    VectorXd ax_next = model.prob.apply(x_next);
    const double obj_next = model.objective(x_next, ax_next);
    result.objective_history.push_back(obj_next);
    result.step_history.push_back(step);

    if (cfg.monitor_descent) {
      const double pot_next = obj_next + weight * (x_next - x).squaredNorm();
      result.potential_history.push_back(pot_next);
      if (pot_next > pot + cfg.descent_slack) {
        std::ostringstream os;
        os.precision(17);
        os << "potential increased at iteration " << k << ": " << pot << " -> " << pot_next;
        throw DescentViolation(os.str());
      }
      pot = pot_next;
    }

    x_prev = std::move(x);
    ax_prev = std::move(ax);
    x = std::move(x_next);
    ax = std::move(ax_next);
    result.iterations = k + 1;
    if (cfg.trace) result.iterates.push_back(x);

    if (step <= cfg.step_tol) {
      result.status = SolveStatus::StepTol;
      break;
    }
    if (result.iterations >= cfg.plateau_min_iter &&
        plateaued(result.objective_history, cfg.obj_window, cfg.obj_rel_tol)) {
      result.status = SolveStatus::ObjPlateau;
      break;
    }
  }

  result.final_stationarity_residual =
      stationarity_residual(x, model.prob, model.p, tau, model.method);
  const KlDiagnostics kl = kl_diagnostics(x, model.prob, model.p);
  result.gamma_index_set_empty = kl.gamma_set_empty;
  result.min_nonzero_magnitude = kl.min_nonzero;
  result.x = std::move(x);
  return result;
}

}  // namespace

SolveResult pge_znorm(const Problem& prob, const ModelParams& p, const SolverConfig& cfg,
                      const VectorXd& x0) {
  return run(Model{Method::Znorm, prob, p}, cfg, x0);
}

SolveResult pge_surrogate(const Problem& prob, const ModelParams& p, const SolverConfig& cfg,
                          const VectorXd& x0) {
  return run(Model{Method::Surrogate, prob, p}, cfg, x0);
}

double solver_step(Method which, const Problem& prob, const ModelParams& p,
                   const SolverConfig& cfg) {
  return cfg.step_scale * cfg.tau_safety * (1.0 - cfg.varsigma) / Model{which, prob, p}.lipschitz();
}

double stationarity_residual(const VectorXd& x, const Problem& prob, const ModelParams& p,
                             double tau, Method which) {
  const Model model{which, prob, p};
  VectorXd grad;
  model.smooth(x, prob.apply(x), grad);
  return (x - model.prox(x - tau * grad, tau)).norm();
}

KlDiagnostics kl_diagnostics(const VectorXd& x, const Problem& prob, const ModelParams& p) {
  const VectorXd ax = prob.apply(x);
  bool empty = true;
  for (Index i = 0; i < ax.size() && empty; ++i) {
    const double t = ax[i];
    const bool first = -p.gamma <= t && t <= 0.0;
    const bool second = -p.sigma - p.gamma <= t && t <= p.gamma - p.sigma;
    empty = !(first || second);
  }
  double min_nz = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) min_nz = std::min(min_nz, std::abs(x[i]));
  }
  if (!std::isfinite(min_nz)) min_nz = 0.0;
  return {empty, min_nz, 2.0 * p.a / (p.rho * (p.a - 1.0))};
}

VectorXd default_start(const Problem& prob) {
  VectorXd colsum = prob.a_mat().colwise().sum().transpose();
  const double norm = colsum.norm();
  if (norm == 0.0) {
    VectorXd e = VectorXd::Zero(prob.cols());
    e[0] = 1.0;
    return e;
  }
  colsum /= norm;
  colsum /= colsum.norm();
  return colsum;
}

double convergence_rate_slope(const std::vector<VectorXd>& iterates, int window) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (iterates.size() < 3) return nan;
  const VectorXd& final_x = iterates.back();
  const std::size_t end = iterates.size() - 1;
  const std::size_t begin = end > static_cast<std::size_t>(window) ? end - window : 0;
  std::vector<double> ks, logs;
  for (std::size_t k = begin; k < end; ++k) {
    const double dist = (iterates[k] - final_x).norm();
    if (dist > 0.0) {
      ks.push_back(static_cast<double>(k));
      logs.push_back(std::log(dist));
    }
  }
  if (ks.size() < 2) return nan;
  const double n = static_cast<double>(ks.size());
  double mk = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    mk += ks[i];
    ml += logs[i];
  }
  mk /= n;
  ml /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sxy += (ks[i] - mk) * (logs[i] - ml);
    sxx += (ks[i] - mk) * (ks[i] - mk);
  }
  return sxx == 0.0 ? nan : sxy / sxx;
}

}  // namespace onebit
