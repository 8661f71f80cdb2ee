// onebit: generate one-bit sensing problems, solve them, and run seeded
// benchmark grids and parameter sweeps.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "onebit/data.hpp"
#include "onebit/errors.hpp"
#include "onebit/experiment.hpp"

namespace fs = std::filesystem;
using namespace onebit;

namespace {

struct Flags {
  std::string m = "800", n = "2000", sparsity = "10", matrix_type = "1";
  std::string mu = "0.3", noise = "0.1", flip = "0.05";
  std::string solver;
  int trials = 1;
  std::uint64_t seed = 1;
  std::optional<double> sigma, gamma, lambda, rho, a;
  std::optional<double> varsigma, beta_cap, step_tol, step_scale;
  std::optional<int> max_iter;
  std::string out;
  int workers = 1;
  bool trace = false;
  bool monitor = false;
  // solve
  std::string problem;
  std::string start;
  // sweep
  std::string param = "sigma";
  std::string values = "0.2:0.2:3";
  std::string raw;
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  try {
    for (double v : parse_values(text)) {
      if constexpr (std::is_integral_v<T>) {
        if (v != static_cast<double>(static_cast<T>(v))) {
          throw ValidationError("expected an integer");
        }
      }
      out.push_back(static_cast<T>(v));
    }
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("--") + flag + ": " + e.what());
  }
  return out;
}

ExperimentSpec build_spec(const Flags& f, bool default_solvers_both) {
  ExperimentSpec spec;
  spec.grid.m = parse_list<int>(f.m, "m");
  spec.grid.n = parse_list<int>(f.n, "n");
  spec.grid.s_star = parse_list<int>(f.sparsity, "sparsity");
  spec.grid.matrix_type.clear();
  for (int t : parse_list<int>(f.matrix_type, "matrix-type")) {
    if (t != 1 && t != 2) throw ValidationError("--matrix-type: expected 1 or 2");
    spec.grid.matrix_type.push_back(static_cast<MatrixType>(t));
  }
  spec.grid.mu = parse_list<double>(f.mu, "mu");
  spec.grid.noise = parse_list<double>(f.noise, "noise");
  spec.grid.flip = parse_list<double>(f.flip, "flip");

  spec.model = {f.sigma, f.gamma, f.lambda, f.rho, f.a};
  if (f.varsigma) spec.solver.varsigma = *f.varsigma;
  if (f.beta_cap) spec.solver.beta_cap = *f.beta_cap;
  if (f.step_tol) spec.solver.step_tol = *f.step_tol;
  if (f.step_scale) spec.solver.step_scale = *f.step_scale;
  if (f.max_iter) spec.solver.max_iter = *f.max_iter;
  spec.solver.monitor_descent = f.monitor;
  spec.solver.trace = f.trace;

  spec.solvers.clear();
  if (f.solver.empty()) {
    if (default_solvers_both) {
      spec.solvers = {SolverKind::Znorm, SolverKind::Scad};
    } else {
      spec.solvers = {SolverKind::Scad};
    }
  } else {
    std::stringstream ss(f.solver);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) spec.solvers.push_back(parse_solver(item));
    }
  }
  if (spec.solvers.empty()) throw ValidationError("--solver: empty solver list");
  spec.trials = f.trials;
  spec.base_seed = f.seed;
  spec.workers = f.workers;
  spec.validate();
  return spec;
}

// Writes through a temporary and renames, so a failed run leaves no partial file.
template <typename Fn>
void write_output(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  const fs::path target(path);
  if (target.has_parent_path() && !fs::is_directory(target.parent_path())) {
    throw IoError("output directory does not exist: " + target.parent_path().string());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    write(out);
    out.close();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + target.string());
}

int cmd_generate(const Flags& f) {
  if (f.out.empty()) throw ValidationError("generate: --out DIR is required");
  const ExperimentSpec spec = build_spec(f, true);
  const auto dirs = generate_bundles(spec, f.out);
  for (const auto& d : dirs) std::cout << d.string() << '\n';
  return 0;
}

int cmd_solve(const Flags& f) {
  ExperimentSpec spec = build_spec(f, false);
  if (spec.solvers.size() != 1) throw ValidationError("solve: give exactly one --solver");
  const SolverKind solver = spec.solvers.front();

  std::optional<ProblemBundle> bundle;
  if (!f.problem.empty()) {
    bundle.emplace(load_problem(f.problem));
  } else {
    GenConfig gen = expand_grid(spec.grid).front();
    gen.seed = trial_seed(spec.base_seed, 0);
    bundle.emplace(generate_problem(gen));
  }
  std::optional<VectorXd> x0;
  if (!f.start.empty()) x0 = read_vector_csv(f.start);

  const SolveOutcome res = solve_bundle(*bundle, solver, spec.model, spec.solver, x0);
  const TrialMetrics& mt = res.record.metrics;
  std::printf("solver=%s lambda=%g sigma=%g iters=%d stop=%s mse=%.6g herr=%.6g fnr=%.6g "
              "fpr=%.6g time_s=%.6g\n",
              std::string(to_string(solver)).c_str(), res.params.lambda, res.params.sigma,
              mt.iterations, std::string(to_string(res.record.status)).c_str(), mt.mse, mt.herr,
              mt.fnr, mt.fpr, mt.wall_seconds);
  if (f.trace) {
    for (std::size_t k = 0; k < res.result.objective_history.size(); ++k) {
      std::fprintf(stderr, "%zu %.17g\n", k, res.result.objective_history[k]);
    }
  }
  if (!f.out.empty()) {
    const fs::path path(f.out);
    const bool fresh = !fs::exists(path);
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot append to " + path.string());
    if (fresh) write_raw_csv(out, {});
    std::ostringstream row;
    write_raw_csv(row, {res.record});
    const std::string text = row.str();
    out << text.substr(text.find('\n') + 1);
    if (!out) throw IoError("failed writing " + path.string());
  }
  return 0;
}

int cmd_bench(const Flags& f) {
  const ExperimentSpec spec = build_spec(f, true);
  const BenchOutput res = run_bench(spec);
  write_output(f.out, [&](std::ostream& o) { write_bench_csv(o, res.rows); });
  if (!f.raw.empty()) write_output(f.raw, [&](std::ostream& o) { write_raw_csv(o, res.raw); });
  return 0;
}

int cmd_sweep(const Flags& f) {
  const ExperimentSpec spec = build_spec(f, true);
  const SweepParam param = parse_sweep_param(f.param);
  std::vector<double> values;
  try {
    values = parse_values(f.values);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("--values: ") + e.what());
  }
  const auto rows = run_sweep(param, values, spec);
  write_output(f.out, [&](std::ostream& o) { write_sweep_csv(o, param, rows); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-bit compressed sensing via zero-norm regularized smooth DC loss"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key/value config file (TOML/INI); flags override it");

  Flags f;
  app.add_option("--m", f.m, "Measurements; comma list or start:step:stop");
  app.add_option("--n", f.n, "Signal length; list");
  app.add_option("--sparsity", f.sparsity, "Nonzeros in the true signal; list");
  app.add_option("--matrix-type", f.matrix_type, "1 = correlated rows, 2 = iid; list");
  app.add_option("--mu", f.mu, "Row correlation for type 1; list");
  app.add_option("--noise", f.noise, "Noise level; list");
  app.add_option("--flip", f.flip, "Sign flip ratio; list");
  app.add_option("--trials", f.trials, "Trials per grid point");
  app.add_option("--seed", f.seed, "Base seed; trial t uses seed + t");
  app.add_option("--solver", f.solver, "znorm, scad or mcp; comma list for bench/sweep");
  app.add_option("--sigma", f.sigma);
  app.add_option("--gamma", f.gamma);
  app.add_option("--lambda", f.lambda);
  app.add_option("--rho", f.rho);
  app.add_option("--a", f.a, "SCAD/MCP shape");
  app.add_option("--varsigma", f.varsigma);
  app.add_option("--beta-cap", f.beta_cap);
  app.add_option("--max-iter", f.max_iter);
  app.add_option("--step-tol", f.step_tol);
  app.add_option("--step-scale", f.step_scale, "Multiplier on the provable step size");
  app.add_option("--out", f.out, "Output path (directory for generate)");
  app.add_option("--workers", f.workers, "Parallel trials");
  app.add_flag("--trace", f.trace, "Print the objective per iteration (solve)");
  app.add_flag("--monitor", f.monitor, "Check potential descent; exit 3 on violation");

  auto* gen = app.add_subcommand("generate", "Write problem bundles");
  auto* solve = app.add_subcommand("solve", "Solve one problem");
  solve->add_option("--problem", f.problem, "Bundle directory; otherwise generated from flags");
  solve->add_option("--start", f.start, "Starting point, one value per line");
  auto* bench = app.add_subcommand("bench", "Aggregate metrics over a grid");
  bench->add_option("--raw", f.raw, "Also write per-trial rows here");
  auto* sweep = app.add_subcommand("sweep", "Mean MSE across a parameter range");
  sweep->add_option("--param", f.param, "sigma or lambda");
  sweep->add_option("--values", f.values, "Comma list or start:step:stop");
  for (auto* sub : {gen, solve, bench, sweep}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) return cmd_generate(f);
    if (*solve) return cmd_solve(f);
    if (*bench) return cmd_bench(f);
    if (*sweep) return cmd_sweep(f);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  } catch (const DescentViolation& e) {
    std::cerr << "descent violation: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
