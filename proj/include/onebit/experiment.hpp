#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "onebit/data.hpp"
#include "onebit/model.hpp"
#include "onebit/solver.hpp"

namespace onebit {

enum class SolverKind { Znorm, Scad, Mcp };

/// "pge-znorm", "pge-scad" or "pge-mcp".
std::string_view to_string(SolverKind s);
/// Accepts the short ("scad") and long ("pge-scad") names.
SolverKind parse_solver(std::string_view name);

/// Model parameters set explicitly by the user; unset fields keep defaults.
struct ModelOverrides {
  std::optional<double> sigma;
  std::optional<double> gamma;
  std::optional<double> lambda;
  std::optional<double> rho;
  std::optional<double> a;
};

/// Reproduction defaults: sigma = 0.8, gamma = 0.05, rho = 10, a = 3.7;
/// lambda = 8 for the zero-norm model, and for the surrogates 4 when
/// n <= 5000 and 8 otherwise.
ModelParams default_params(SolverKind s, int n);
ModelParams resolve_params(SolverKind s, int n, const ModelOverrides& overrides);

/// Cartesian grid of generator settings.
struct GridSpec {
  std::vector<int> m{800};
  std::vector<int> n{2000};
  std::vector<int> s_star{10};
  std::vector<MatrixType> matrix_type{MatrixType::TypeI};
  std::vector<double> mu{0.3};
  std::vector<double> noise{0.1};
  std::vector<double> flip{0.05};
};

struct ExperimentSpec {
  GridSpec grid;
  ModelOverrides model;
  SolverConfig solver;
  std::vector<SolverKind> solvers{SolverKind::Znorm, SolverKind::Scad};
  int trials = 1;
  std::uint64_t base_seed = 1;
  int workers = 1;

  void validate() const;
};

/// Per-trial seed derivation: base_seed + trial.
std::uint64_t trial_seed(std::uint64_t base_seed, int trial);

/// Grid points in row-major order (m slowest, flip fastest), seeds unset.
/// Throws ValidationError if any point is invalid.
std::vector<GenConfig> expand_grid(const GridSpec& grid);

struct TrialRecord {
  GenConfig gen;
  SolverKind solver = SolverKind::Znorm;
  int trial = 0;
  TrialMetrics metrics;
  SolveStatus status = SolveStatus::MaxIter;
  bool ok = false;
  std::string error;
};

/// Solves one problem and scores it. Wall time covers the solve plus the
/// spectral norm estimate behind the step size. A solver exception is
/// captured in the record rather than thrown.
TrialRecord run_trial(const ProblemBundle& bundle, SolverKind solver,
                      const ModelOverrides& overrides, const SolverConfig& cfg,
                      const std::optional<VectorXd>& x0 = std::nullopt);

/// Full solve returned alongside the record, for callers that need the
/// iterate history. Exceptions propagate.
struct SolveOutcome {
  TrialRecord record;
  SolveResult result;
  ModelParams params;
};
SolveOutcome solve_bundle(const ProblemBundle& bundle, SolverKind solver,
                          const ModelOverrides& overrides, const SolverConfig& cfg,
                          const std::optional<VectorXd>& x0 = std::nullopt);

struct BenchRow {
  GenConfig point;
  SolverKind solver = SolverKind::Znorm;
  int trials = 0;
  int failed = 0;
  double mse = 0.0;
  double herr = 0.0;
  double fnr = 0.0;
  double fpr = 0.0;
  double time_s = 0.0;
  double iters = 0.0;
};

struct BenchOutput {
  std::vector<BenchRow> rows;
  std::vector<TrialRecord> raw;
};

/// Means over trials per (grid point, solver); failed trials are excluded
/// from the means and counted in the status column.
BenchOutput run_bench(const ExperimentSpec& spec);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);
void write_raw_csv(std::ostream& out, const std::vector<TrialRecord>& raw);

enum class SweepParam { Sigma, Lambda };

std::string_view to_string(SweepParam p);
SweepParam parse_sweep_param(std::string_view name);

struct SweepRow {
  double value = 0.0;
  SolverKind solver = SolverKind::Znorm;
  int trials = 0;
  int failed = 0;
  double mse = 0.0;
};

/// Mean MSE for each parameter value and solver, at the first grid point.
/// Every value sees the same trial problems.
std::vector<SweepRow> run_sweep(SweepParam param, const std::vector<double>& values,
                                const ExperimentSpec& spec);

void write_sweep_csv(std::ostream& out, SweepParam param, const std::vector<SweepRow>& rows);

/// Writes one bundle per grid point and trial under out_dir, named
/// p<point>_t<trial>. Validates the whole grid before touching disk.
std::vector<std::filesystem::path> generate_bundles(const ExperimentSpec& spec,
                                                    const std::filesystem::path& out_dir);

/// Parses "0.2,0.4" lists and "start:step:stop" ranges (inclusive).
std::vector<double> parse_values(std::string_view text);

}  // namespace onebit
