#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dopt/error.hpp"
#include "dopt/oracles.hpp"
#include "dopt_test/oracles.hpp"

using namespace dopt;

namespace {

data::SparseDataset random_shard(std::size_t rows, std::size_t dim, std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  data::SparseDataset ds;
  ds.dim = dim;
  for (std::size_t r = 0; r < rows; ++r) {
    data::SparseRow row;
    for (std::uint32_t k = 0; k < dim; ++k)
      if (coin(gen)) {
        row.index.push_back(k);
        row.value.push_back(n(gen));
      }
    ds.rows.push_back(row);
    ds.labels.push_back(coin(gen) ? 1 : -1);
  }
  return ds;
}

Vector random_vector(Eigen::Index d, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vector v(d);
  for (Eigen::Index k = 0; k < d; ++k) v[k] = n(gen);
  return v;
}

}  // namespace

TEST(Quadratic, ZeroGradientAtOrigin) {
  QuadraticSpec spec{{Eigen::MatrixXd::Identity(3, 3)}, {Vector::Zero(3)}, {0.0}};
  QuadraticSuite suite(spec);
  EXPECT_EQ(suite.local_grad(0, Vector::Zero(3)), Vector::Zero(3));
}

TEST(Quadratic, NoiselessSampleIsExact) {
  RandomQuadraticOptions opt;
  opt.nodes = 2;
  opt.dim = 4;
  opt.sigmas = {0.0, 0.0};
  auto suite = quadratic_suite(random_quadratic(opt));
  Rng rng(1);
  std::mt19937_64 gen(1);
  const Vector x = random_vector(4, gen);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(suite->sample(i, x, rng), suite->local_grad(i, x));
}

TEST(Quadratic, RejectsAsymmetricHessian) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 0.5, 0, 1;
  EXPECT_THROW(QuadraticSuite({{a}, {Vector::Zero(2)}, {1.0}}), InvalidArgument);
}

TEST(Quadratic, MonteCarloMeanAndSecondMoment) {
  RandomQuadraticOptions opt;
  opt.nodes = 2;
  opt.dim = 6;
  opt.sigmas = {0.5, 3.0};
  auto suite = quadratic_suite(random_quadratic(opt));
  std::mt19937_64 gen(2);
  const Vector x = random_vector(6, gen);
  const int n = 100000;
  for (std::size_t i = 0; i < 2; ++i) {
    Rng rng(100 + i);
    const Vector g = suite->local_grad(i, x);
    Vector mean = Vector::Zero(6);
    double second = 0.0;
    for (int k = 0; k < n; ++k) {
      const Vector s = suite->sample(i, x, rng);
      mean += s;
      second += (s - g).squaredNorm();
    }
    mean /= n;
    second /= n;
    const double sigma = opt.sigmas[i];
    EXPECT_LE((mean - g).norm(), 3.0 * sigma / std::sqrt(double(n)));
    EXPECT_NEAR(second, sigma * sigma, 0.05 * sigma * sigma);
  }
  EXPECT_EQ(suite->samples(0), std::uint64_t(n));
  EXPECT_EQ(suite->total_samples(), std::uint64_t(2 * n));
}

TEST(Quadratic, GeneratorHitsRequestedConstants) {
  RandomQuadraticOptions opt;
  opt.nodes = 5;
  opt.dim = 8;
  opt.smoothness = 2.0;
  opt.strong_convexity = 0.3;
  opt.delta = 1.7;
  opt.sigmas.assign(5, 1.0);
  opt.seed = 12;
  auto suite = quadratic_suite(random_quadratic(opt));
  EXPECT_NEAR(suite->smoothness(), 2.0, 1e-10);
  const Vector zero = Vector::Zero(8);
  EXPECT_NEAR(suite->global_value(zero) - suite->optimal_value(), 1.7, 1e-10);
  EXPECT_LE(suite->global_grad(suite->minimizer()).norm(), 1e-10);
  for (const auto& a : suite->spec().A) {
    EXPECT_GT(dopt_test::eigen_descending(a).back(), 0.0);
  }
}

TEST(OracleSuite, SharedDrawCountsEveryPoint) {
  RandomQuadraticOptions opt;
  opt.nodes = 1;
  opt.dim = 3;
  opt.sigmas = {1.0};
  auto suite = quadratic_suite(random_quadratic(opt));
  Rng rng(3);
  const Vector pts[2] = {Vector::Zero(3), Vector::Ones(3)};
  Vector out[2];
  suite->sample_shared(0, pts, rng, out);
  EXPECT_EQ(suite->samples(0), 2u);
  // Additive noise is shared, so the difference is exact.
  EXPECT_LE(((out[1] - out[0]) - (suite->local_grad(0, pts[1]) - suite->local_grad(0, pts[0]))).norm(), 1e-12);
  suite->reset_counters();
  EXPECT_EQ(suite->total_samples(), 0u);
  EXPECT_THROW(suite->sample(1, pts[0], rng), InvalidArgument);
  EXPECT_THROW(suite->sample(0, Vector::Zero(4), rng), InvalidArgument);
}

TEST(Logistic, SingleSampleByHand) {
  data::SparseDataset ds;
  ds.dim = 2;
  ds.rows.push_back({{0}, {1.0}});
  ds.labels.push_back(1);
  const Vector x = Vector::Zero(2);
  EXPECT_NEAR(logistic_value(ds, 0.0, x), std::log(2.0), 1e-15);
  const Vector g = logistic_grad(ds, 0.0, x);
  EXPECT_NEAR(g[0], -0.5, 1e-15);
  EXPECT_EQ(g[1], 0.0);
}

TEST(Logistic, RegularizerVanishesAtOrigin) {
  std::mt19937_64 gen(4);
  const auto ds = random_shard(10, 5, gen);
  const Vector x = Vector::Zero(5);
  EXPECT_DOUBLE_EQ(logistic_value(ds, 0.3, x), logistic_value(ds, 0.0, x));
  EXPECT_EQ(logistic_grad(ds, 0.3, x), logistic_grad(ds, 0.0, x));
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto ds = random_shard(1 + gen() % 20, 6, gen);
    const double reg = 0.1 * (trial % 3);
    const Vector x = random_vector(6, gen);
    const Vector g = logistic_grad(ds, reg, x);
    const Vector fd = dopt_test::finite_difference([&](const Vector& v) { return logistic_value(ds, reg, v); }, x);
    EXPECT_LE((g - fd).norm(), 1e-5 * std::max(1.0, g.norm()));
  }
}

TEST(Logistic, StableForLargeMargins) {
  data::SparseDataset ds;
  ds.dim = 1;
  ds.rows.push_back({{0}, {1.0}});
  ds.labels.push_back(1);
  for (double t : {-700.0, 700.0}) {
    const Vector x = Vector::Constant(1, t);
    EXPECT_TRUE(std::isfinite(logistic_value(ds, 0.0, x)));
    EXPECT_TRUE(std::isfinite(logistic_grad(ds, 0.0, x)[0]));
  }
  EXPECT_NEAR(logistic_value(ds, 0.0, Vector::Constant(1, -700.0)), 700.0, 1e-9);
}

TEST(LogisticSuite, OneRowNoNoiseIsExact) {
  std::mt19937_64 gen(6);
  LogisticSpec spec;
  spec.shards = {random_shard(1, 4, gen)};
  spec.sigmas = {0.0};
  auto suite = logistic_suite(spec);
  Rng rng(1);
  const Vector x = random_vector(4, gen);
  EXPECT_LE((suite->sample(0, x, rng) - suite->local_grad(0, x)).norm(), 1e-15);
}

TEST(LogisticSuite, UnbiasedAndCounted) {
  std::mt19937_64 gen(7);
  LogisticSpec spec;
  spec.shards = {random_shard(15, 4, gen), random_shard(9, 4, gen)};
  spec.sigmas = {0.0, 2.0};
  spec.reg = 0.05;
  auto suite = logistic_suite(spec);
  const Vector x = random_vector(4, gen, 0.5);
  const int n = 100000;
  for (std::size_t i = 0; i < 2; ++i) {
    Rng rng(10 + i);
    const Vector g = suite->local_grad(i, x);
    Vector mean = Vector::Zero(4), sq = Vector::Zero(4);
    for (int k = 0; k < n; ++k) {
      const Vector s = suite->sample(i, x, rng);
      mean += s;
      sq += (s - g).cwiseAbs2();
    }
    mean /= n;
    const Vector sd = (sq / n).cwiseSqrt();
    for (int k = 0; k < 4; ++k) EXPECT_LE(std::abs(mean[k] - g[k]), 4.0 * sd[k] / std::sqrt(double(n)) + 1e-12);
  }
  EXPECT_EQ(suite->total_samples(), std::uint64_t(2 * n));
}

TEST(LogisticSuite, SmoothnessBoundDominatesHessian) {
  std::mt19937_64 gen(8);
  LogisticSpec spec;
  spec.shards = {random_shard(12, 5, gen), random_shard(12, 5, gen)};
  spec.sigmas = {1.0, 1.0};
  spec.reg = 0.01;
  auto suite = logistic_suite(spec);
  const double bound = suite->smoothness_bound();
  // Finite-difference Hessian at random points never exceeds the bound.
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = random_vector(5, gen);
    Eigen::MatrixXd h(5, 5);
    for (int k = 0; k < 5; ++k) {
      Vector a = x, b = x;
      a[k] += 1e-5;
      b[k] -= 1e-5;
      h.col(k) = (suite->global_grad(a) - suite->global_grad(b)) / 2e-5;
    }
    h = 0.5 * (h + h.transpose()).eval();
    EXPECT_LE(dopt_test::eigen_descending(h).front(), bound + 1e-6);
  }
  EXPECT_GE(suite->mean_squared_smoothness_bound(), 0.0);
}
