#include "onebit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include "onebit/errors.hpp"

namespace onebit {

std::string_view to_string(SolverKind s) {
  switch (s) {
    case SolverKind::Znorm: return "pge-znorm";
    case SolverKind::Scad: return "pge-scad";
    case SolverKind::Mcp: return "pge-mcp";
  }
  return "unknown";
}

SolverKind parse_solver(std::string_view name) {
  if (name.rfind("pge-", 0) == 0) name.remove_prefix(4);
  if (name == "znorm") return SolverKind::Znorm;
  if (name == "scad") return SolverKind::Scad;
  if (name == "mcp") return SolverKind::Mcp;
  throw ValidationError("unknown solver '" + std::string(name) +
                        "' (expected pge-znorm, pge-scad or pge-mcp)");
}

ModelParams default_params(SolverKind s, int n) {
  ModelParams p;
  p.surrogate = s == SolverKind::Mcp ? SurrogateKind::Mcp : SurrogateKind::Scad;
  if (s == SolverKind::Znorm) {
    p.lambda = 8.0;
  } else {
    p.lambda = n <= 5000 ? 4.0 : 8.0;
  }
  return p;
}

ModelParams resolve_params(SolverKind s, int n, const ModelOverrides& o) {
  ModelParams p = default_params(s, n);
  if (o.sigma) p.sigma = *o.sigma;
  if (o.gamma) p.gamma = *o.gamma;
  if (o.lambda) p.lambda = *o.lambda;
  if (o.rho) p.rho = *o.rho;
  if (o.a) p.a = *o.a;
  p.validate();
  return p;
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw ValidationError("trials must be at least 1");
  if (workers < 1) throw ValidationError("workers must be at least 1");
  if (solvers.empty()) throw ValidationError("at least one solver is required");
  solver.validate();
  for (const SolverKind s : solvers) {
    for (const int n : grid.n) resolve_params(s, n, model);
  }
  expand_grid(grid);
}

std::uint64_t trial_seed(std::uint64_t base_seed, int trial) {
  return base_seed + static_cast<std::uint64_t>(trial);
}

std::vector<GenConfig> expand_grid(const GridSpec& g) {
  auto require = [](bool nonempty, const char* name) {
    if (!nonempty) throw ValidationError(std::string("grid: no values for ") + name);
  };
  require(!g.m.empty(), "m");
  require(!g.n.empty(), "n");
  require(!g.s_star.empty(), "sparsity");
  require(!g.matrix_type.empty(), "matrix type");
  require(!g.mu.empty(), "mu");
  require(!g.noise.empty(), "noise");
  require(!g.flip.empty(), "flip");

  std::vector<GenConfig> points;
  for (const int m : g.m)
    for (const int n : g.n)
      for (const int s : g.s_star)
        for (const MatrixType t : g.matrix_type)
          for (const double mu : g.mu)
            for (const double noise : g.noise)
              for (const double flip : g.flip) {
                GenConfig c;
                c.m = m;
                c.n = n;
                c.s_star = s;
                c.matrix_type = t;
                c.mu = mu;
                c.noise_level = noise;
                c.flip_ratio = flip;
                c.validate();
                points.push_back(c);
              }
  return points;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Runs job(i) for i in [0, count) on up to `workers` threads. Jobs write to
// their own preallocated slots, so the result does not depend on scheduling.
void parallel_for(int count, int workers, const std::function<void(int)>& job) {
  const int threads = std::max(1, std::min(workers, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) job(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

SolveOutcome solve_bundle(const ProblemBundle& bundle, SolverKind solver,
                          const ModelOverrides& overrides, const SolverConfig& cfg,
                          const std::optional<VectorXd>& x0) {
  const Problem& prob = bundle.problem;
  SolveOutcome out;
  out.params = resolve_params(solver, static_cast<int>(prob.cols()), overrides);
  const VectorXd start_x = x0 ? *x0 : default_start(prob);

  const auto start = std::chrono::steady_clock::now();
  out.result = solver == SolverKind::Znorm ? pge_znorm(prob, out.params, cfg, start_x)
                                           : pge_surrogate(prob, out.params, cfg, start_x);
  const double elapsed = seconds_since(start) + prob.spectral_seconds();

  TrialRecord& rec = out.record;
  rec.gen = bundle.config;
  rec.solver = solver;
  rec.metrics = compute_metrics(out.result.x, bundle.x_true, prob.phi(), bundle.support);
  rec.metrics.wall_seconds = elapsed;
  rec.metrics.iterations = out.result.iterations;
  rec.status = out.result.status;
  rec.ok = true;
  return out;
}

TrialRecord run_trial(const ProblemBundle& bundle, SolverKind solver,
                      const ModelOverrides& overrides, const SolverConfig& cfg,
                      const std::optional<VectorXd>& x0) {
  try {
    return solve_bundle(bundle, solver, overrides, cfg, x0).record;
  } catch (const std::exception& e) {
    TrialRecord rec;
    rec.gen = bundle.config;
    rec.solver = solver;
    rec.ok = false;
    rec.error = e.what();
    return rec;
  }
}

BenchOutput run_bench(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<GenConfig> points = expand_grid(spec.grid);
  const int ns = static_cast<int>(spec.solvers.size());
  const int jobs = static_cast<int>(points.size()) * spec.trials;

  std::vector<TrialRecord> slots(static_cast<std::size_t>(jobs) * ns);
  parallel_for(jobs, spec.workers, [&](int job) {
    const int point = job / spec.trials;
    const int trial = job % spec.trials;
    GenConfig gen = points[point];
    gen.seed = trial_seed(spec.base_seed, trial);
    std::optional<ProblemBundle> bundle;
    std::string gen_error;
    try {
      bundle.emplace(generate_problem(gen));
    } catch (const std::exception& e) {
      gen_error = e.what();
    }
    for (int s = 0; s < ns; ++s) {
      TrialRecord rec;
      if (bundle) {
        rec = run_trial(*bundle, spec.solvers[s], spec.model, spec.solver);
      } else {
        rec.gen = gen;
        rec.solver = spec.solvers[s];
        rec.error = gen_error;
      }
      rec.trial = trial;
      slots[static_cast<std::size_t>(job) * ns + s] = std::move(rec);
    }
  });

  BenchOutput out;
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (int s = 0; s < ns; ++s) {
      BenchRow row;
      row.point = points[p];
      row.solver = spec.solvers[s];
      row.trials = spec.trials;
      int good = 0;
      for (int t = 0; t < spec.trials; ++t) {
        const TrialRecord& rec = slots[(p * spec.trials + t) * ns + s];
        if (!rec.ok) {
          ++row.failed;
          continue;
        }
        ++good;
        row.mse += rec.metrics.mse;
        row.herr += rec.metrics.herr;
        row.fnr += rec.metrics.fnr;
        row.fpr += rec.metrics.fpr;
        row.time_s += rec.metrics.wall_seconds;
        row.iters += rec.metrics.iterations;
      }
      if (good > 0) {
        row.mse /= good;
        row.herr /= good;
        row.fnr /= good;
        row.fpr /= good;
        row.time_s /= good;
        row.iters /= good;
      } else {
        const double nan = std::nan("");
        row.mse = row.herr = row.fnr = row.fpr = row.time_s = row.iters = nan;
      }
      out.rows.push_back(row);
    }
  }
  // Raw records ordered by point, trial, solver.
  out.raw = std::move(slots);
  return out;
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string status_text(int failed, int trials) {
  if (failed == 0) return "ok";
  return "failed " + std::to_string(failed) + "/" + std::to_string(trials);
}

void write_point(std::ostream& out, const GenConfig& g, const char* spec) {
  out << g.m << ',' << g.n << ',' << g.s_star << ',' << static_cast<int>(g.matrix_type) << ','
      << fmt(spec, g.mu) << ',' << fmt(spec, g.noise_level) << ',' << fmt(spec, g.flip_ratio);
}

}  // namespace

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "solver,m,n,s_star,matrix_type,mu,noise,flip,trials,mse,herr,fnr,fpr,time_s,iters,status\n";
  for (const BenchRow& r : rows) {
    out << to_string(r.solver) << ',';
    write_point(out, r.point, "%.6g");
    out << ',' << r.trials << ',' << fmt("%.6g", r.mse) << ',' << fmt("%.6g", r.herr) << ','
        << fmt("%.6g", r.fnr) << ',' << fmt("%.6g", r.fpr) << ',' << fmt("%.6g", r.time_s) << ','
        << fmt("%.6g", r.iters) << ',' << status_text(r.failed, r.trials) << '\n';
  }
}

void write_raw_csv(std::ostream& out, const std::vector<TrialRecord>& raw) {
  out << "solver,m,n,s_star,matrix_type,mu,noise,flip,trial,seed,mse,herr,fnr,fpr,time_s,"
         "iters,stop,error\n";
  for (const TrialRecord& r : raw) {
    out << to_string(r.solver) << ',';
    write_point(out, r.gen, "%.17g");
    out << ',' << r.trial << ',' << r.gen.seed << ',';
    if (r.ok) {
      out << fmt("%.17g", r.metrics.mse) << ',' << fmt("%.17g", r.metrics.herr) << ','
          << fmt("%.17g", r.metrics.fnr) << ',' << fmt("%.17g", r.metrics.fpr) << ','
          << fmt("%.6g", r.metrics.wall_seconds) << ',' << r.metrics.iterations << ','
          << to_string(r.status) << ",\n";
    } else {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), '"', '\'');
      out << ",,,,,,,\"" << msg << "\"\n";
    }
  }
}

std::string_view to_string(SweepParam p) {
  return p == SweepParam::Sigma ? "sigma" : "lambda";
}

SweepParam parse_sweep_param(std::string_view name) {
  if (name == "sigma") return SweepParam::Sigma;
  if (name == "lambda") return SweepParam::Lambda;
  throw ValidationError("unknown sweep parameter '" + std::string(name) +
                        "' (expected sigma or lambda)");
}

std::vector<SweepRow> run_sweep(SweepParam param, const std::vector<double>& values,
                                const ExperimentSpec& spec) {
  spec.validate();
  if (values.empty()) throw ValidationError("sweep: no values given");
  const GenConfig point = expand_grid(spec.grid).front();

  std::vector<ModelOverrides> overrides(values.size(), spec.model);
  for (std::size_t v = 0; v < values.size(); ++v) {
    if (!(values[v] > 0.0)) {
      throw ValidationError("sweep: " + std::string(to_string(param)) + " values must be positive");
    }
    (param == SweepParam::Sigma ? overrides[v].sigma : overrides[v].lambda) = values[v];
    for (const SolverKind s : spec.solvers) resolve_params(s, point.n, overrides[v]);
  }

  const int nv = static_cast<int>(values.size());
  const int ns = static_cast<int>(spec.solvers.size());
  const std::size_t per_trial = static_cast<std::size_t>(nv) * ns;
  std::vector<TrialRecord> slots(per_trial * spec.trials);
  parallel_for(spec.trials, spec.workers, [&](int trial) {
    GenConfig gen = point;
    gen.seed = trial_seed(spec.base_seed, trial);
    const ProblemBundle bundle = generate_problem(gen);
    for (int v = 0; v < nv; ++v) {
      for (int s = 0; s < ns; ++s) {
        slots[trial * per_trial + v * ns + s] =
            run_trial(bundle, spec.solvers[s], overrides[v], spec.solver);
      }
    }
  });

  std::vector<SweepRow> rows;
  for (int v = 0; v < nv; ++v) {
    for (int s = 0; s < ns; ++s) {
      SweepRow row;
      row.value = values[v];
      row.solver = spec.solvers[s];
      row.trials = spec.trials;
      int good = 0;
      for (int t = 0; t < spec.trials; ++t) {
        const TrialRecord& rec = slots[t * per_trial + v * ns + s];
        if (rec.ok) {
          ++good;
          row.mse += rec.metrics.mse;
        } else {
          ++row.failed;
        }
      }
      row.mse = good > 0 ? row.mse / good : std::nan("");
      rows.push_back(row);
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, SweepParam param, const std::vector<SweepRow>& rows) {
  out << "parameter,value,solver,trials,mse,status\n";
  for (const SweepRow& r : rows) {
    out << to_string(param) << ',' << fmt("%.6g", r.value) << ',' << to_string(r.solver) << ','
        << r.trials << ',' << fmt("%.6g", r.mse) << ',' << status_text(r.failed, r.trials) << '\n';
  }
}

std::vector<std::filesystem::path> generate_bundles(const ExperimentSpec& spec,
                                                    const std::filesystem::path& out_dir) {
  if (spec.trials < 1) throw ValidationError("trials must be at least 1");
  const std::vector<GenConfig> points = expand_grid(spec.grid);
  std::vector<std::filesystem::path> dirs;
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (int t = 0; t < spec.trials; ++t) {
      GenConfig gen = points[p];
      gen.seed = trial_seed(spec.base_seed, t);
      const std::filesystem::path dir =
          out_dir / ("p" + std::to_string(p) + "_t" + std::to_string(t));
      save_problem(dir, generate_problem(gen));
      dirs.push_back(dir);
    }
  }
  return dirs;
}

namespace {

double parse_double(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ValidationError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::vector<double> parse_values(std::string_view text) {
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const std::size_t a = text.find(':');
    const std::size_t b = text.find(':', a + 1);
    if (b == std::string_view::npos || text.find(':', b + 1) != std::string_view::npos) {
      throw ValidationError("range must be start:step:stop, got '" + std::string(text) + "'");
    }
    const double start = parse_double(text.substr(0, a));
    const double step = parse_double(text.substr(a + 1, b - a - 1));
    const double stop = parse_double(text.substr(b + 1));
    if (!(step > 0.0)) throw ValidationError("range step must be positive");
    if (stop < start) throw ValidationError("range stop is below start");
    const long count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 100000) throw ValidationError("range has too many values");
    for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::size_t end = comma == std::string_view::npos ? text.size() : comma;
    out.push_back(parse_double(text.substr(pos, end - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace onebit
