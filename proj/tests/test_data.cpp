#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "onebit/data.hpp"
#include "onebit/errors.hpp"
#include "onebit/rng.hpp"

using namespace onebit;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  const fs::path dir = fs::temp_directory_path() /
                       ("onebit_test_" + name + "_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter++));
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

MatrixXd sample_covariance(const MatrixXd& rows) {
  const MatrixXd centered = rows.rowwise() - rows.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(rows.rows() - 1);
}

}  // namespace

TEST(Rng, ReproducibleAndStreamsDiffer) {
  Rng a(42, Stream::Signal), b(42, Stream::Signal), c(42, Stream::Noise);
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    EXPECT_NE(x, c.normal());
  }
  Rng u(7, Stream::Internal);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
    EXPECT_LT(u.below(5), 5u);
  }
}

TEST(Rng, NormalMoments) {
  Rng r(1, Stream::Internal);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Generate, ShapesAndTruth) {
  GenConfig g;
  g.m = 50;
  g.n = 80;
  g.s_star = 6;
  g.seed = 3;
  const ProblemBundle b = generate_problem(g);
  EXPECT_EQ(b.problem.rows(), 50);
  EXPECT_EQ(b.problem.cols(), 80);
  EXPECT_EQ(b.support.size(), 6u);
  EXPECT_TRUE(std::is_sorted(b.support.begin(), b.support.end()));
  EXPECT_EQ((b.x_true.array() != 0.0).count(), 6);
  EXPECT_NEAR(b.x_true.norm(), 1.0, 1e-14);
  for (Index i : b.support) EXPECT_NE(b.x_true[i], 0.0);
  for (Index i = 0; i < 50; ++i) {
    EXPECT_TRUE(b.problem.b()[i] == 1.0 || b.problem.b()[i] == -1.0);
  }
  EXPECT_EQ((b.problem.a_mat() - b.problem.b().asDiagonal() * b.problem.phi()).norm(), 0.0);
}

TEST(Generate, NoiselessIsConsistent) {
  for (auto type : {MatrixType::TypeI, MatrixType::TypeII}) {
    GenConfig g;
    g.m = 300;
    g.n = 50;
    g.noise_level = 0.0;
    g.flip_ratio = 0.0;
    g.matrix_type = type;
    g.seed = 9;
    const ProblemBundle b = generate_problem(g);
    const VectorXd margin = b.problem.b().cwiseProduct(b.problem.phi() * b.x_true);
    EXPECT_GT(margin.minCoeff(), 0.0);
  }
}

TEST(Generate, FlipFraction) {
  GenConfig g;
  g.m = 10000;
  g.n = 20;
  g.s_star = 3;
  g.noise_level = 0.0;
  g.flip_ratio = 0.0;
  g.seed = 21;
  const ProblemBundle base = generate_problem(g);
  g.flip_ratio = 0.1;
  const ProblemBundle flipped = generate_problem(g);
  const double frac =
      (base.problem.b().array() != flipped.problem.b().array()).cast<double>().mean();
  EXPECT_NEAR(frac, 0.1, 0.01);
}

TEST(Generate, TypeOneCovariance) {
  for (double mu : {0.0, 0.3, 0.7}) {
    const MatrixXd rows = correlated_gaussian_rows(100000, 5, mu, 5);
    const MatrixXd cov = sample_covariance(rows);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        EXPECT_NEAR(cov(i, j), std::pow(mu, std::abs(i - j)), 0.02) << mu << " " << i << j;
      }
    }
  }
}

TEST(Generate, TypeOneEqualsCholeskyFactor) {
  const int n = 12;
  const double mu = 0.3;
  MatrixXd sigma(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sigma(i, j) = std::pow(mu, std::abs(i - j));
  const MatrixXd l = sigma.llt().matrixL();

  const MatrixXd rows = correlated_gaussian_rows(20, n, mu, 77);
  Rng rng(77, Stream::Matrix);
  for (int i = 0; i < 20; ++i) {
    VectorXd g(n);
    for (int j = 0; j < n; ++j) g[j] = rng.normal();
    const VectorXd want = l * g;
    EXPECT_LT((rows.row(i).transpose() - want).norm(), 1e-12);
  }
}

TEST(Generate, Deterministic) {
  GenConfig g;
  g.m = 60;
  g.n = 90;
  g.seed = 1234;
  const ProblemBundle a = generate_problem(g);
  const ProblemBundle b = generate_problem(g);
  EXPECT_EQ(a.problem.phi(), b.problem.phi());
  EXPECT_EQ(a.problem.b(), b.problem.b());
  EXPECT_EQ(a.x_true, b.x_true);
  EXPECT_EQ(a.support, b.support);
  g.seed = 1235;
  EXPECT_NE(generate_problem(g).problem.b(), a.problem.b());
}

TEST(Generate, Validation) {
  GenConfig g;
  g.s_star = g.n + 1;
  EXPECT_THROW(generate_problem(g), ValidationError);
  g = GenConfig{};
  g.mu = 1.0;
  EXPECT_THROW(generate_problem(g), ValidationError);
  g = GenConfig{};
  g.flip_ratio = 1.0;
  EXPECT_THROW(generate_problem(g), ValidationError);
  g = GenConfig{};
  g.m = 0;
  EXPECT_THROW(generate_problem(g), ValidationError);
}

TEST(Metrics, Examples) {
  GenConfig g;
  g.m = 200;
  g.n = 40;
  g.seed = 2;
  const ProblemBundle b = generate_problem(g);
  TrialMetrics mt = compute_metrics(b.x_true, b.x_true, b.problem.phi(), b.support);
  EXPECT_EQ(mt.mse, 0.0);
  EXPECT_EQ(mt.herr, 0.0);
  EXPECT_EQ(mt.fnr, 0.0);
  EXPECT_EQ(mt.fpr, 0.0);

  mt = compute_metrics(-b.x_true, b.x_true, b.problem.phi(), b.support);
  EXPECT_NEAR(mt.mse, 2.0, 1e-14);
  EXPECT_EQ(mt.herr, 1.0);
  EXPECT_EQ(mt.fnr, 0.0);
  EXPECT_EQ(mt.fpr, 0.0);

  VectorXd e1(2), e2(2);
  e1 << 1, 0;
  e2 << 0, 1;
  mt = compute_metrics(e1, e2, MatrixXd::Identity(2, 2), {1});
  EXPECT_NEAR(mt.mse, std::sqrt(2.0), 1e-15);
  EXPECT_EQ(mt.fnr, 1.0);
  EXPECT_EQ(mt.fpr, 1.0);
}

TEST(Metrics, NumericalSupportThreshold) {
  VectorXd x(4);
  x << 1.0, 1e-5, 1.1e-5, 0.0;
  const std::vector<Index> want{0, 2};
  EXPECT_EQ(numerical_support(x), want);
}

TEST(Metrics, HerrScaleInvariant) {
  GenConfig g;
  g.m = 100;
  g.n = 30;
  g.seed = 4;
  const ProblemBundle b = generate_problem(g);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> normal;
  VectorXd x(30);
  for (int i = 0; i < 30; ++i) x[i] = normal(gen);
  const double h1 = compute_metrics(x, b.x_true, b.problem.phi(), b.support).herr;
  const double h2 = compute_metrics(3.7 * x, b.x_true, b.problem.phi(), b.support).herr;
  EXPECT_EQ(h1, h2);
  EXPECT_EQ(sign3(0.0), 0.0);
}

TEST(Bundle, RoundTripIsExact) {
  GenConfig g;
  g.m = 30;
  g.n = 25;
  g.s_star = 4;
  g.mu = 0.45;
  g.noise_level = 0.3;
  g.flip_ratio = 0.15;
  g.seed = 0xfeedbeefcafeULL;
  const ProblemBundle b = generate_problem(g);
  const fs::path dir = scratch_dir("roundtrip");
  save_problem(dir, b);
  const ProblemBundle r = load_problem(dir);
  EXPECT_EQ(r.problem.phi(), b.problem.phi());
  EXPECT_EQ(r.problem.b(), b.problem.b());
  EXPECT_EQ(r.x_true, b.x_true);
  EXPECT_EQ(r.support, b.support);
  EXPECT_EQ(r.config.seed, g.seed);
  EXPECT_EQ(r.config.mu, g.mu);
  EXPECT_EQ(r.config.flip_ratio, g.flip_ratio);
  EXPECT_EQ(r.config.matrix_type, g.matrix_type);

  // Saving again gives identical bytes.
  const fs::path dir2 = scratch_dir("roundtrip2");
  save_problem(dir2, r);
  for (const char* f : {"meta.json", "phi.csv", "b.csv", "xtrue.csv", "support.csv"}) {
    EXPECT_EQ(slurp(dir / f), slurp(dir2 / f)) << f;
  }
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST(Bundle, LoadErrors) {
  GenConfig g;
  g.m = 5;
  g.n = 4;
  g.s_star = 2;
  const ProblemBundle b = generate_problem(g);

  const fs::path dir = scratch_dir("errors");
  save_problem(dir, b);
  spit(dir / "b.csv", "1\n-1\n2\n1\n1\n");
  EXPECT_THROW(load_problem(dir), ValidationError);

  save_problem(dir, b);
  spit(dir / "b.csv", "1\n-1\n1\n1\n");
  EXPECT_THROW(load_problem(dir), ValidationError);

  save_problem(dir, b);
  std::string phi = slurp(dir / "phi.csv");
  phi.replace(phi.find(','), 1, ",abc,");
  spit(dir / "phi.csv", phi);
  try {
    load_problem(dir);
    ADD_FAILURE() << "expected a parse error";
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("phi.csv"), std::string::npos) << what;
    EXPECT_NE(what.find(":1"), std::string::npos) << what;
  }

  save_problem(dir, b);
  fs::remove(dir / "xtrue.csv");
  EXPECT_THROW(load_problem(dir), IoError);
  EXPECT_THROW(load_problem(dir / "nope"), IoError);
  fs::remove_all(dir);
}

TEST(VectorCsv, RoundTrip) {
  const fs::path dir = scratch_dir("vec");
  fs::create_directories(dir);
  VectorXd v(3);
  v << 0.1, -1.0 / 3.0, 2e-300;
  write_vector_csv(dir / "v.csv", v);
  EXPECT_EQ(read_vector_csv(dir / "v.csv"), v);
  fs::remove_all(dir);
}
