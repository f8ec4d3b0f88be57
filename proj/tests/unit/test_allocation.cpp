#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "dopt/allocation.hpp"
#include "dopt/error.hpp"
#include "dopt/oracles.hpp"
#include "dopt_test/oracles.hpp"

using namespace dopt;
using namespace dopt::allocation;

TEST(Optimal, TwoNodeExample) {
  const auto plan = optimal_batches({{1.0, 3.0}}, 1.0);
  EXPECT_DOUBLE_EQ(plan.batches[0], 1.0);
  EXPECT_DOUBLE_EQ(plan.batches[1], 3.0);
  EXPECT_DOUBLE_EQ(plan.total, 4.0);
  EXPECT_DOUBLE_EQ(plan.mse_bound, 1.0);
  // Nothing cheaper on the integer grid up to 20.
  EXPECT_EQ(dopt_test::min_feasible_total_enumerate({1.0, 3.0}, 1.0, 1, 20), 4);
}

TEST(Optimal, EqualSigmasSplitEvenly) {
  const double sigma = 2.0, eps = 0.5;
  const auto plan = optimal_batches({std::vector<double>(5, sigma)}, eps);
  for (double b : plan.batches) EXPECT_NEAR(b, sigma * sigma / (5 * eps * eps), 1e-12);
}

TEST(Optimal, HalvingEpsQuadruplesBatches) {
  const NoiseProfile p{{0.5, 1.5, 4.0}};
  const auto a = optimal_batches(p, 0.3), b = optimal_batches(p, 0.15);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(b.batches[i], 4.0 * a.batches[i], 1e-10 * b.batches[i]);
}

TEST(Optimal, TotalIsArithmeticMeanSquared) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.5, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    NoiseProfile p;
    for (int i = 0; i < 1 + int(gen() % 8); ++i) p.sigmas.push_back(u(gen));
    const double eps = 0.2 + 0.1 * (trial % 5);
    const auto plan = optimal_batches(p, eps);
    const double am = mean_stats(p).am;
    EXPECT_NEAR(plan.total, am * am / (eps * eps), 1e-10 * plan.total);
    EXPECT_NEAR(plan.mse_bound, eps * eps, 1e-10 * eps * eps);
  }
}

TEST(Optimal, RejectsNonPositiveSigma) {
  EXPECT_THROW(optimal_batches({{1.0, 0.0}}, 1.0), InvalidArgument);
  EXPECT_THROW(optimal_batches({{1.0, -1.0}}, 1.0), InvalidArgument);
  EXPECT_THROW(optimal_batches({{1.0}}, 0.0), InvalidArgument);
}

TEST(ProportionalBatches, MatchesFormula) {
  const auto plan = proportional_batches({{1.0, 3.0}}, 0.25);
  EXPECT_EQ(plan.counts(), (std::vector<std::int64_t>{256, 768}));
}

TEST(Baselines, TwoNodeTotals) {
  const NoiseProfile p{{1.0, 3.0}};
  EXPECT_DOUBLE_EQ(qm_batches(p, 1.0).total, 6.0);       // ceil(5/2) = 3 each
  EXPECT_DOUBLE_EQ(uniform_batches(p, 1.0).total, 10.0); // ceil(9/2) = 5 each
}

TEST(Baselines, IntegerPlansMeetTarget) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    NoiseProfile p;
    for (int i = 0; i < 1 + int(gen() % 10); ++i) p.sigmas.push_back(u(gen));
    const double eps = 0.1 + u(gen) / 5.0;
    for (const auto& plan : {qm_batches(p, eps), uniform_batches(p, eps)}) {
      EXPECT_LE(plan.mse_bound, eps * eps * (1 + 1e-12));
      for (auto b : plan.counts()) EXPECT_GE(b, 1);
    }
    const auto t1 = proportional_batches(p, eps);
    EXPECT_LE(t1.mse_bound, eps * eps / 16.0 * (1 + 1e-12));
  }
}

TEST(Baselines, ZeroSigmaStillGivesOneSample) {
  const NoiseProfile p{{0.0, 0.0}};
  EXPECT_EQ(qm_batches(p, 1.0).counts(), (std::vector<std::int64_t>{1, 1}));
  EXPECT_EQ(proportional_batches(p, 1.0).counts(), (std::vector<std::int64_t>{1, 1}));
}

TEST(MeanStats, PowerMeanOrdering) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    NoiseProfile p;
    for (int i = 0; i < 1 + int(gen() % 10); ++i) p.sigmas.push_back(u(gen));
    const auto s = mean_stats(p);
    EXPECT_LE(s.p23, s.am * (1 + 1e-12));
    EXPECT_LE(s.am, s.qm * (1 + 1e-12));
  }
  const auto s = mean_stats({{1.0, 8.0}});
  EXPECT_DOUBLE_EQ(s.am, 4.5);
  EXPECT_NEAR(s.qm, std::sqrt(32.5), 1e-14);
  EXPECT_NEAR(s.p23, std::pow(2.5, 1.5), 1e-12);
}

TEST(MseBound, HandValue) {
  EXPECT_DOUBLE_EQ(mse_bound({{1.0, 2.0}}, {1.0, 4.0}), (1.0 + 1.0) / 4.0);
  EXPECT_THROW(mse_bound({{1.0}}, {0.0}), InvalidArgument);
}

TEST(VrBatchSchedule, ProbabilitiesInRange) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    NoiseProfile p;
    for (int i = 0; i < 1 + int(gen() % 20); ++i) p.sigmas.push_back(u(gen));
    const auto s = vr_schedule(p, 0.05 + u(gen) / 10.0);
    EXPECT_GT(s.p, 0.0);
    EXPECT_LE(s.p, 1.0);
    EXPECT_GT(s.q, 0.0);
    EXPECT_LE(s.q, 1.0);
    EXPECT_GE(s.mini_batch, 1);
    const double m = double(p.nodes());
    const double big = double(s.total_big());
    EXPECT_EQ(s.mini_batch, std::max<std::int64_t>(1, std::int64_t(std::ceil(std::sqrt(big) / m))));
    EXPECT_NEAR(s.p, s.mini_batch * s.q / (s.mini_batch * s.q + big / m), 1e-14);
  }
}

TEST(VrBatchSchedule, VanishingNoise) {
  const auto s = vr_schedule({std::vector<double>(4, 0.0)}, 0.1);
  EXPECT_EQ(s.big_batches, (std::vector<std::int64_t>(4, 1)));
  EXPECT_EQ(s.mini_batch, 1);
  EXPECT_NEAR(s.q, 0.5, 1e-15);
}

TEST(VrBatchSchedule, ConstantOverride) {
  const NoiseProfile p{{1.0, 2.0}};
  const auto a = vr_schedule(p, 0.5);
  const auto b = vr_schedule(p, 0.5, 64.0);
  EXPECT_EQ(a.big_batches, (std::vector<std::int64_t>{96, 192}));
  EXPECT_EQ(b.big_batches, (std::vector<std::int64_t>{192, 384}));
}

TEST(EstimateSigmas, RecoversInjectedNoise) {
  RandomQuadraticOptions opt;
  opt.nodes = 3;
  opt.dim = 10;
  opt.sigmas = {1.0, 2.0, 4.0};
  auto suite = quadratic_suite(random_quadratic(opt));
  const auto est = estimate_sigmas(*suite, Vector::Zero(10), 5000, 17);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(est.sigmas[i], opt.sigmas[i], 0.05 * opt.sigmas[i]);
  EXPECT_EQ(suite->total_samples(), 15000u);
  EXPECT_THROW(estimate_sigmas(*suite, Vector::Zero(10), 1, 0), InvalidArgument);
}
