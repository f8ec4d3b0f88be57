#include <cmath>

#include <gtest/gtest.h>

#include "dopt/error.hpp"
#include "dopt/schedules.hpp"

using namespace dopt;
using namespace dopt::schedules;

TEST(Rounds, FormulaAndFloor) {
  const double factor = (2.0 + std::sqrt(2.0)) / 2.0;
  EXPECT_EQ(fastmix_rounds(1.0, std::exp(1.0)), std::int64_t(std::ceil(factor)));
  EXPECT_EQ(fastmix_rounds(0.25, std::exp(1.0)), std::int64_t(std::ceil(2.0 * factor)));
  EXPECT_EQ(fastmix_rounds(0.5, 1.0), 0);
  EXPECT_EQ(fastmix_rounds(0.5, 0.5), 0);
  EXPECT_EQ(fastmix_rounds(0.5, 100.0, 0.0), 0);
  EXPECT_THROW(fastmix_rounds(0.0, 2.0), InvalidArgument);
  EXPECT_THROW(fastmix_rounds(0.5, 0.0), InvalidArgument);
}

TEST(Rounds, TrackingRoundsByHand) {
  // m = 2: 14 * 70 * 4 = 3920, and 1.7071 * log(3920) = 14.12.
  EXPECT_EQ(dnss_rounds(2, 1.0), 15);
  // m = 1, b q = 1: 1.7071 * log(1344) = 12.30.
  EXPECT_EQ(vr_rounds(1, 1.0, 1, 1.0), 13);
  // Smaller b q enlarges the log argument.
  EXPECT_GT(vr_rounds(4, 0.3, 1, 0.1), vr_rounds(4, 0.3, 1, 1.0));
  EXPECT_EQ(vr_rounds(4, 0.3, 5, 0.4), vr_rounds(4, 0.3, 1, 1.0));
}

TEST(Rounds, ScaleMultipliesBeforeTheCeiling) {
  const auto full = dnss_rounds(10, 0.4);
  const auto half = dnss_rounds(10, 0.4, 0.5);
  EXPECT_LE(half, (full + 1) / 2 + 1);
  EXPECT_GE(half, full / 2);
}

TEST(Rounds, ZeroInitialTrackerNeedsNoWarmup) {
  EXPECT_EQ(dnss_initial_rounds(5, 0.3, 1.0, 0.5, 100, 0.1, 0.0), 0);
  EXPECT_EQ(vr_initial_rounds(5, 0.3, 100, 0.1, 0.0), 0);
  EXPECT_GT(dnss_initial_rounds(5, 0.3, 1.0, 0.5, 100, 0.1, 10.0), 0);
}

TEST(DnssPlan, TwoNodeExample) {
  const auto cfg = dnss_plan(1.0, 1.0, {{1.0, 3.0}}, 0.25, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(cfg.eta, 0.5);
  EXPECT_EQ(cfg.iterations, 512);
  EXPECT_EQ(cfg.batches, (std::vector<std::int64_t>{256, 768}));
  EXPECT_EQ(cfg.rounds, 15);
  EXPECT_EQ(cfg.initial_rounds, 0);
  EXPECT_FALSE(cfg.initial_rounds_rule);
}

TEST(DnssPlan, BaselinesShareTheAccuracyLevel) {
  const allocation::NoiseProfile p{{1.0, 3.0}};
  const auto qm = dnss_plan(1.0, 1.0, p, 0.25, 1.0, 0.0, 1.0, BatchRule::qm);
  const auto uni = dnss_plan(1.0, 1.0, p, 0.25, 1.0, 0.0, 1.0, BatchRule::uniform);
  EXPECT_EQ(qm.batches, allocation::qm_batches(p, 0.0625).counts());
  EXPECT_EQ(uni.batches, allocation::uniform_batches(p, 0.0625).counts());
  EXPECT_EQ(qm.iterations, 512);
}

TEST(DnssPlan, DeferredInitialRounds) {
  const auto cfg = dnss_plan(1.0, 2.0, {{1.0, 1.0, 1.0}}, 0.5, 0.4);
  ASSERT_TRUE(cfg.initial_rounds_rule);
  EXPECT_EQ(cfg.initial_rounds_rule(3.0), dnss_initial_rounds(3, 0.4, 2.0, 0.25, cfg.iterations, 0.5, 3.0));
}

TEST(DnssPlan, IterationCap) {
  EXPECT_THROW(dnss_plan(1e6, 1e6, {{1.0}}, 1e-3, 1.0, 0.0), InvalidArgument);
  EXPECT_THROW(dnss_plan(0.0, 1.0, {{1.0}}, 0.1, 1.0, 0.0), InvalidArgument);
}

TEST(BatchRule, RoundTrip) {
  for (auto r : {BatchRule::optimal, BatchRule::qm, BatchRule::uniform}) EXPECT_EQ(parse_batch_rule(to_string(r)), r);
  EXPECT_THROW(parse_batch_rule("median"), InvalidArgument);
}

TEST(VrPlan, FollowsTheVrSchedule) {
  const allocation::NoiseProfile p{{1.0, 2.0}};
  const auto vr = allocation::vr_schedule(p, 0.5);
  const auto cfg = vr_plan(1.0, 2.0, p, 0.5, 0.6, 0.0);
  EXPECT_DOUBLE_EQ(cfg.eta, 1.0 / 96.0);
  EXPECT_EQ(cfg.big_batches, vr.big_batches);
  EXPECT_EQ(cfg.mini_batch, vr.mini_batch);
  EXPECT_EQ(cfg.p, vr.p);
  EXPECT_EQ(cfg.q, vr.q);
  EXPECT_EQ(cfg.iterations, std::int64_t(std::ceil(384.0 * 2.0 / 0.25 + 2.0 / vr.p)));
  EXPECT_EQ(cfg.rounds, vr_rounds(2, 0.6, vr.mini_batch, vr.q));
  EXPECT_EQ(cfg.initial_rounds, 0);
}

TEST(VrPlan, IterationCap) {
  EXPECT_THROW(vr_plan(1e5, 1e5, {{1.0}}, 1e-2, 1.0, 0.0), InvalidArgument);
}
