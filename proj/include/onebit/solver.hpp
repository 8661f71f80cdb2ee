#pragma once

#include <string_view>
#include <vector>

#include "onebit/model.hpp"

namespace onebit {

/// Settings shared by both proximal-gradient engines.
///
/// The step is tau = tau_safety * (1 - varsigma) / L for the relevant
/// Lipschitz bound L. The extrapolation weight is capped by the smaller of
/// beta_cap and the bound sqrt(varsigma (1/tau - L) / tau) / (2 (1/tau + L))
/// under which the potential function provably decreases.
struct SolverConfig {
  double varsigma = 0.5;
  double tau_safety = 0.98;
  double beta_cap = 0.235;
  /// Multiplies tau. Values above 1 leave the range where descent is
  /// guaranteed; the extrapolation bound then drops to 0.
  double step_scale = 1.0;
  int max_iter = 2000;
  double step_tol = 1e-6;
  int obj_window = 10;
  double obj_rel_tol = 1e-10;
  /// The plateau test only runs from this iteration on.
  int plateau_min_iter = 100;
  bool monitor_descent = false;
  /// Slack allowed on potential increase before DescentViolation is thrown.
  double descent_slack = 1e-9;
  /// Keep every iterate in SolveResult::iterates.
  bool trace = false;

  void validate() const;
};

enum class SolveStatus { StepTol, ObjPlateau, MaxIter };

std::string_view to_string(SolveStatus s);

struct SolveResult {
  VectorXd x;
  int iterations = 0;
  SolveStatus status = SolveStatus::MaxIter;
  /// Objective (F or G) at x^0, x^1, ..., x^iterations.
  std::vector<double> objective_history;
  /// ||x^{k+1} - x~^k|| per iteration.
  std::vector<double> step_history;
  /// Potential H or Upsilon at (x^{k+1}, x^k); filled when monitoring.
  std::vector<double> potential_history;
  /// x^0, ..., x^iterations when SolverConfig::trace is set.
  std::vector<VectorXd> iterates;
  double tau = 0.0;
  double lipschitz = 0.0;
  double beta_cap = 0.0;
  double final_stationarity_residual = 0.0;
  bool gamma_index_set_empty = false;
  double min_nonzero_magnitude = 0.0;
};

/// Nesterov extrapolation weights beta_k = (t_{k-1} - 1) / t_k with
/// t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2 and t_{-1} = t_0 = 1, capped.
class BetaSchedule {
 public:
  explicit BetaSchedule(double cap) : cap_(cap) {}

  /// Weight for the current iteration; advances the recursion.
  double next();

 private:
  double cap_;
  double t_prev_ = 1.0;
  double t_curr_ = 1.0;
};

/// Largest extrapolation weight keeping the potential nonincreasing.
double beta_bound(double tau, double lipschitz, double varsigma);

/// PGe-znorm: proximal gradient with extrapolation on F.
/// Throws ValidationError for an off-sphere x0 or invalid settings and
/// DescentViolation when monitoring detects an increase of H.
SolveResult pge_znorm(const Problem& prob, const ModelParams& p, const SolverConfig& cfg,
                      const VectorXd& x0);

/// Proximal gradient with extrapolation on G, with the SCAD or MCP
/// surrogate chosen by p.surrogate (PGe-scad for Scad).
SolveResult pge_surrogate(const Problem& prob, const ModelParams& p, const SolverConfig& cfg,
                          const VectorXd& x0);

enum class Method { Znorm, Surrogate };

/// Step size each engine uses for the given problem and settings.
double solver_step(Method which, const Problem& prob, const ModelParams& p,
                   const SolverConfig& cfg);

/// ||x - prox(x - tau grad(x))|| with the deterministic prox selection.
double stationarity_residual(const VectorXd& x, const Problem& prob, const ModelParams& p,
                             double tau, Method which);

struct KlDiagnostics {
  bool gamma_set_empty;
  /// Smallest nonzero |x_i|, 0 for x = 0.
  double min_nonzero;
  /// 2a / (rho (a - 1)).
  double mcp_threshold;
};

/// Reports whether no residual (Ax)_i sits in a curved branch of the
/// smoothed loss, plus |x|_nz against the surrogate saturation threshold.
KlDiagnostics kl_diagnostics(const VectorXd& x, const Problem& prob, const ModelParams& p);

/// e^T A / ||e^T A||, or e^1 if the column sums vanish.
VectorXd default_start(const Problem& prob);

/// Least-squares slope of log ||x^k - x_final|| against k over the last
/// `window` traced iterates before the final one. Iterates equal to x_final
/// are skipped. Returns NaN with fewer than two usable points.
double convergence_rate_slope(const std::vector<VectorXd>& iterates, int window = 50);

}  // namespace onebit
