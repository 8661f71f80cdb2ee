#include "onebit/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include <json.hpp>

#include "onebit/errors.hpp"
#include "onebit/rng.hpp"

namespace onebit {

namespace fs = std::filesystem;

void GenConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("generator config: " + msg); };
  if (m < 1) fail("m must be at least 1");
  if (n < 1) fail("n must be at least 1");
  if (s_star < 1 || s_star > n) fail("sparsity must lie in [1, n]");
  if (matrix_type != MatrixType::TypeI && matrix_type != MatrixType::TypeII) {
    fail("matrix type must be 1 or 2");
  }
  if (!(mu >= 0.0 && mu < 1.0)) fail("mu must lie in [0, 1)");
  if (!(noise_level >= 0.0)) fail("noise level must be nonnegative");
  if (!(flip_ratio >= 0.0 && flip_ratio < 1.0)) fail("flip ratio must lie in [0, 1)");
}

std::string_view to_string(MatrixType t) { return t == MatrixType::TypeI ? "1" : "2"; }

MatrixXd correlated_gaussian_rows(int rows, int cols, double mu, std::uint64_t seed) {
  Rng rng(seed, Stream::Matrix);
  const double innovation = std::sqrt(1.0 - mu * mu);
  MatrixXd phi(rows, cols);
  for (int i = 0; i < rows; ++i) {
    double prev = rng.normal();
    phi(i, 0) = prev;
    for (int j = 1; j < cols; ++j) {
      prev = mu * prev + innovation * rng.normal();
      phi(i, j) = prev;
    }
  }
  return phi;
}

ProblemBundle generate_problem(const GenConfig& cfg) {
  cfg.validate();
  const int m = cfg.m;
  const int n = cfg.n;

  // Partial Fisher-Yates for a uniform s*-subset.
  Rng support_rng(cfg.seed, Stream::Support);
  std::vector<Index> pool(n);
  std::iota(pool.begin(), pool.end(), Index{0});
  for (int k = 0; k < cfg.s_star; ++k) {
    const auto pick = k + static_cast<Index>(support_rng.below(static_cast<std::uint64_t>(n - k)));
    std::swap(pool[k], pool[pick]);
  }
  std::vector<Index> support(pool.begin(), pool.begin() + cfg.s_star);
  std::sort(support.begin(), support.end());

  Rng signal_rng(cfg.seed, Stream::Signal);
  VectorXd xi(cfg.s_star);
  for (int k = 0; k < cfg.s_star; ++k) xi[k] = signal_rng.normal();
  xi /= xi.norm();
  VectorXd x_true = VectorXd::Zero(n);
  for (int k = 0; k < cfg.s_star; ++k) x_true[support[k]] = xi[k];
  x_true /= x_true.norm();

  MatrixXd phi;
  if (cfg.matrix_type == MatrixType::TypeI) {
    phi = correlated_gaussian_rows(m, n, cfg.mu, cfg.seed);
  } else {
    Rng matrix_rng(cfg.seed, Stream::Matrix);
    phi.resize(m, n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) phi(i, j) = matrix_rng.normal();
    }
  }

  Rng noise_rng(cfg.seed, Stream::Noise);
  Rng flip_rng(cfg.seed, Stream::Flips);
  const VectorXd clean = phi * x_true;
  VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    const double noisy = clean[i] + cfg.noise_level * noise_rng.normal();
    const double sgn = noisy > 0.0 ? 1.0 : -1.0;
    const double zeta = flip_rng.uniform() < cfg.flip_ratio ? -1.0 : 1.0;
    b[i] = zeta * sgn;
  }

  return ProblemBundle{Problem(std::move(phi), std::move(b), x_true), x_true, std::move(support),
                       cfg};
}

double sign3(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

std::vector<Index> numerical_support(const VectorXd& x) {
  std::vector<Index> supp;
  if (x.size() == 0) return supp;
  const double cutoff = 1e-5 * x.cwiseAbs().maxCoeff();
  for (Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > cutoff) supp.push_back(i);
  }
  return supp;
}

TrialMetrics compute_metrics(const VectorXd& x_sol, const VectorXd& x_true, const MatrixXd& phi,
                             const std::vector<Index>& support) {
  if (x_sol.size() != x_true.size() || phi.cols() != x_sol.size()) {
    throw ValidationError("metrics: dimension mismatch");
  }
  TrialMetrics out;
  out.mse = (x_sol - x_true).norm();

  const VectorXd y_sol = phi * x_sol;
  const VectorXd y_true = phi * x_true;
  Index mismatches = 0;
  for (Index i = 0; i < y_sol.size(); ++i) mismatches += sign3(y_sol[i]) != sign3(y_true[i]);
  out.herr = static_cast<double>(mismatches) / static_cast<double>(phi.rows());

  const Index n = x_sol.size();
  std::vector<char> in_true(n, 0), in_sol(n, 0);
  for (Index i : support) in_true[i] = 1;
  for (Index i : numerical_support(x_sol)) in_sol[i] = 1;
  Index missed = 0, false_pos = 0;
  for (Index i = 0; i < n; ++i) {
    missed += in_true[i] && !in_sol[i];
    false_pos += in_sol[i] && !in_true[i];
  }
  const auto t = static_cast<double>(support.size());
  out.fnr = support.empty() ? 0.0 : static_cast<double>(missed) / t;
  out.fpr = static_cast<double>(n) == t ? 0.0 : static_cast<double>(false_pos) / (n - t);
  return out;
}

// ---------------------------------------------------------------------------
// Bundle I/O

namespace {

std::string format17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::vector<double>> read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    int field = 0;
    while (true) {
      ++field;
      const std::size_t comma = line.find(',', start);
      const std::size_t end = comma == std::string::npos ? line.size() : comma;
      const char* first = line.data() + start;
      const char* last = line.data() + end;
      while (first < last && *first == ' ') ++first;
      while (last > first && last[-1] == ' ') --last;
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last || first == last) {
        std::ostringstream os;
        os << path.filename().string() << ":" << line_no << ": field " << field
           << ": invalid number '" << std::string(first, last) << "'";
        throw ValidationError(os.str());
      }
      row.push_back(value);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

VectorXd read_column(const fs::path& path) {
  const auto rows = read_csv(path);
  VectorXd v(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 1) {
      std::ostringstream os;
      os << path.filename().string() << ": line " << i + 1 << ": expected one field, found "
         << rows[i].size();
      throw ValidationError(os.str());
    }
    v[static_cast<Index>(i)] = rows[i][0];
  }
  return v;
}

}  // namespace

void save_problem(const fs::path& dir, const ProblemBundle& bundle) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const GenConfig& cfg = bundle.config;
  nlohmann::ordered_json meta;
  meta["m"] = cfg.m;
  meta["n"] = cfg.n;
  meta["s_star"] = cfg.s_star;
  meta["matrix_type"] = static_cast<int>(cfg.matrix_type);
  meta["mu"] = cfg.mu;
  meta["noise_level"] = cfg.noise_level;
  meta["flip_ratio"] = cfg.flip_ratio;
  meta["seed"] = cfg.seed;
  {
    const fs::path path = dir / "meta.json";
    auto out = open_out(path);
    out << meta.dump(2) << "\n";
    close_out(out, path);
  }
  {
    const fs::path path = dir / "phi.csv";
    auto out = open_out(path);
    const MatrixXd& phi = bundle.problem.phi();
    std::string line;
    for (Index i = 0; i < phi.rows(); ++i) {
      line.clear();
      for (Index j = 0; j < phi.cols(); ++j) {
        if (j) line += ',';
        line += format17(phi(i, j));
      }
      line += '\n';
      out << line;
    }
    close_out(out, path);
  }
  auto write_column = [&dir](const char* name, auto&& values) {
    const fs::path path = dir / name;
    auto out = open_out(path);
    for (const auto& v : values) out << v << "\n";
    close_out(out, path);
  };
  std::vector<std::string> b_lines;
  for (Index i = 0; i < bundle.problem.b().size(); ++i) {
    b_lines.push_back(bundle.problem.b()[i] > 0 ? "1" : "-1");
  }
  write_column("b.csv", b_lines);
  std::vector<std::string> x_lines;
  for (Index i = 0; i < bundle.x_true.size(); ++i) x_lines.push_back(format17(bundle.x_true[i]));
  write_column("xtrue.csv", x_lines);
  write_column("support.csv", bundle.support);
}

ProblemBundle load_problem(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a problem bundle directory: " + dir.string());

  GenConfig cfg;
  {
    const fs::path path = dir / "meta.json";
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(in);
      cfg.m = meta.at("m").get<int>();
      cfg.n = meta.at("n").get<int>();
      cfg.s_star = meta.at("s_star").get<int>();
      cfg.matrix_type = static_cast<MatrixType>(meta.at("matrix_type").get<int>());
      cfg.mu = meta.at("mu").get<double>();
      cfg.noise_level = meta.at("noise_level").get<double>();
      cfg.flip_ratio = meta.at("flip_ratio").get<double>();
      cfg.seed = meta.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("meta.json: " + std::string(e.what()));
    }
    cfg.validate();
  }

  const auto phi_rows = read_csv(dir / "phi.csv");
  const auto m = static_cast<Index>(phi_rows.size());
  if (m == 0) throw ValidationError("phi.csv: no rows");
  const auto n = static_cast<Index>(phi_rows.front().size());
  MatrixXd phi(m, n);
  for (Index i = 0; i < m; ++i) {
    if (static_cast<Index>(phi_rows[i].size()) != n) {
      std::ostringstream os;
      os << "phi.csv: row " << i + 1 << " has " << phi_rows[i].size() << " fields, expected " << n;
      throw ValidationError(os.str());
    }
    for (Index j = 0; j < n; ++j) phi(i, j) = phi_rows[i][j];
  }
  if (m != cfg.m || n != cfg.n) {
    std::ostringstream os;
    os << "dimension mismatch: phi.csv is " << m << "x" << n << " but meta.json says " << cfg.m
       << "x" << cfg.n;
    throw ValidationError(os.str());
  }

  VectorXd b = read_column(dir / "b.csv");
  if (b.size() != m) {
    std::ostringstream os;
    os << "dimension mismatch: b.csv has " << b.size() << " entries, phi.csv has " << m << " rows";
    throw ValidationError(os.str());
  }
  for (Index i = 0; i < b.size(); ++i) {
    if (b[i] != 1.0 && b[i] != -1.0) {
      std::ostringstream os;
      os << "b.csv:" << i + 1 << ": field 1: entry " << b[i] << " is not +1 or -1";
      throw ValidationError(os.str());
    }
  }

  VectorXd x_true = read_column(dir / "xtrue.csv");
  if (x_true.size() != n) throw ValidationError("dimension mismatch: xtrue.csv length differs from n");

  std::vector<Index> support;
  const fs::path support_path = dir / "support.csv";
  if (fs::exists(support_path)) {
    const VectorXd raw = read_column(support_path);
    for (Index k = 0; k < raw.size(); ++k) {
      const double v = raw[k];
      if (v < 0 || v >= static_cast<double>(n) || v != std::floor(v)) {
        std::ostringstream os;
        os << "support.csv:" << k + 1 << ": field 1: index " << v << " out of range";
        throw ValidationError(os.str());
      }
      support.push_back(static_cast<Index>(v));
    }
  }

  return ProblemBundle{Problem(std::move(phi), std::move(b), x_true), x_true, std::move(support),
                       cfg};
}

}  // namespace onebit

namespace onebit {

VectorXd read_vector_csv(const fs::path& path) { return read_column(path); }

void write_vector_csv(const fs::path& path, const VectorXd& v) {
  auto out = open_out(path);
  for (Index i = 0; i < v.size(); ++i) out << format17(v[i]) << '\n';
  close_out(out, path);
}

}  // namespace onebit
