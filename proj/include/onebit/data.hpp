#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "onebit/model.hpp"

namespace onebit {

/// Type I: rows i.i.d. N(0, Sigma) with Sigma_ij = mu^|i-j|.
/// Type II: i.i.d. standard normal entries.
enum class MatrixType { TypeI = 1, TypeII = 2 };

struct GenConfig {
  int m = 500;
  int n = 1000;
  int s_star = 5;
  MatrixType matrix_type = MatrixType::TypeI;
  double mu = 0.3;
  double noise_level = 0.1;
  double flip_ratio = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

/// A problem together with how it was made.
struct ProblemBundle {
  Problem problem;
  VectorXd x_true;
  /// Sorted 0-based indices of the nonzeros of x_true.
  std::vector<Index> support;
  GenConfig config;
};

/// Synthetic one-bit instance b = zeta o sgn(Phi x_true + eps), reproducible
/// from cfg.seed. sgn(t) is +1 for t > 0 and -1 otherwise.
ProblemBundle generate_problem(const GenConfig& cfg);

/// Phi rows for matrix type I: row = L g with L the lower Cholesky factor of
/// Sigma_ij = mu^|i-j|, applied through its first-order recursion.
MatrixXd correlated_gaussian_rows(int rows, int cols, double mu, std::uint64_t seed);

struct TrialMetrics {
  double mse = 0.0;
  double herr = 0.0;
  double fnr = 0.0;
  double fpr = 0.0;
  double wall_seconds = 0.0;
  int iterations = 0;
};

/// Entries counted as nonzero: |x_i| > 1e-5 ||x||_inf.
std::vector<Index> numerical_support(const VectorXd& x);

/// Three-valued sign: -1, 0 or +1.
double sign3(double t);

/// MSE = ||x_sol - x_true||, Herr over three-valued signs of Phi x, and
/// FNR/FPR of numerical_support(x_sol) against the true support.
TrialMetrics compute_metrics(const VectorXd& x_sol, const VectorXd& x_true, const MatrixXd& phi,
                             const std::vector<Index>& support);

/// Bundle directory layout: meta.json, phi.csv, b.csv, xtrue.csv, support.csv.
void save_problem(const std::filesystem::path& dir, const ProblemBundle& bundle);

/// Throws IoError for unreadable files and ValidationError (with file, line
/// and field) for malformed or inconsistent contents.
ProblemBundle load_problem(const std::filesystem::path& dir);

/// One value per line, 17 significant digits on write.
VectorXd read_vector_csv(const std::filesystem::path& path);
void write_vector_csv(const std::filesystem::path& path, const VectorXd& v);

std::string_view to_string(MatrixType t);

}  // namespace onebit
