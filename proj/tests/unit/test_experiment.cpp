#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>

#include "dopt/error.hpp"
#include "dopt/experiment.hpp"

using namespace dopt;
using namespace dopt::experiment;

namespace {

const char* kSmoke = R"({
  "problem": {"kind": "quadratic", "dim": 10, "smoothness": 1.0, "strong_convexity": 0.5, "delta": 1.0, "seed": 3},
  "topology": {"kind": "ring", "m": 4},
  "sigmas": {"explicit": [1, 2, 3, 4]},
  "eps": 0.5,
  "seeds": [1, 2, 3]
})";

config::ExperimentConfig smoke(const std::string& algorithm = "dnss") {
  return config::with_algorithm(config::parse(kSmoke), algorithm);
}

std::string csv_of(const RunRecord& r) {
  std::ostringstream out;
  write_csv(r, out);
  return out.str();
}

RunRecord synthetic(std::vector<std::pair<std::uint64_t, double>> points, std::string fp = "f") {
  RunRecord r;
  r.algorithm = "dnss";
  r.fingerprint = std::move(fp);
  std::int64_t t = 0;
  for (auto [s, g] : points) {
    MetricRow row;
    row.iter = t++;
    row.samples = s;
    row.grad_norm_sq = g;
    row.f_value = 2.0 * g;
    row.consensus_err = 0.5;
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace

TEST(RunExperiment, SameSeedGivesIdenticalCsv) {
  const auto cfg = smoke();
  const auto a = run_experiment(cfg, 1);
  const auto b = run_experiment(cfg, 1);
  EXPECT_EQ(csv_of(a), csv_of(b));
  EXPECT_NE(csv_of(a), csv_of(run_experiment(cfg, 2)));
  EXPECT_EQ(a.fingerprint, config::fingerprint(cfg));
  EXPECT_EQ(a.seed, 1u);
}

TEST(RunExperiment, TheoremScheduleOnTheSmokeProblem) {
  const auto rec = run_experiment(smoke(), 1);
  // T = 32 Delta L / eps^2 = 128 and the 16x plan needs 400 samples per iteration.
  EXPECT_EQ(rec.rows.size(), 129u);
  EXPECT_EQ(rec.total_samples(), 128u * 400u);
  EXPECT_LT(rec.rows.back().grad_norm_sq, rec.rows.front().grad_norm_sq);
}

TEST(RunExperiment, EveryAlgorithmRuns) {
  for (const auto& name : config::kAlgorithms) {
    auto cfg = smoke(name);
    cfg.max_samples = 20000;
    const auto rec = run_experiment(cfg, 4);
    EXPECT_EQ(rec.algorithm, name);
    EXPECT_GE(rec.rows.size(), 2u) << name;
    EXPECT_LE(rec.total_samples(), 20000u) << name;
  }
}

TEST(RunExperiment, BudgetBelowOneIterationKeepsOnlyTheStart) {
  auto cfg = smoke();
  cfg.max_samples = 10;
  const auto rec = run_experiment(cfg, 1);
  ASSERT_EQ(rec.rows.size(), 1u);
  EXPECT_TRUE(rec.truncated);
  EXPECT_EQ(rec.output_iter, 0);
}

TEST(RunExperiment, PilotSamplesAreCounted) {
  auto cfg = smoke();
  cfg.sigmas.estimate_pilot = 20;
  const auto rec = run_experiment(cfg, 1);
  EXPECT_EQ(rec.rows.front().samples, 80u);
}

TEST(RunExperiment, FailuresNameTheStage) {
  auto cfg = smoke();
  config::LogisticProblem lp;
  lp.dataset = "no/such/file.svm";
  cfg.problem = lp;
  try {
    run_experiment(cfg, 1);
    FAIL() << "expected failure";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("stage 'oracles'"), std::string::npos) << e.what();
  }
}

TEST(RunSeeds, MatchesSequentialRuns) {
  const auto cfg = smoke();
  setenv("DOPT_SIM_THREADS", "2", 1);
  const auto all = run_seeds(cfg);
  unsetenv("DOPT_SIM_THREADS");
  ASSERT_EQ(all.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(csv_of(all[k]), csv_of(run_experiment(cfg, cfg.seeds[k])));
}

TEST(RunSeeds, WorkerCountFromEnvironment) {
  setenv("DOPT_SIM_THREADS", "3", 1);
  EXPECT_EQ(worker_count(10), 3u);
  EXPECT_EQ(worker_count(2), 2u);
  setenv("DOPT_SIM_THREADS", "0", 1);
  EXPECT_GE(worker_count(10), 1u);
  unsetenv("DOPT_SIM_THREADS");
  EXPECT_GE(worker_count(1), 1u);
}

TEST(MakePlan, AllocationPerAlgorithm) {
  const auto base = smoke();
  auto problem = build_problem(base);
  const allocation::NoiseProfile profile{{1, 2, 3, 4}};
  const auto dnss = make_plan(base, problem, 0.5, profile);
  ASSERT_TRUE(dnss.dnss);
  EXPECT_EQ(dnss.dnss->batches, allocation::proportional_batches(profile, 0.5).counts());

  const auto gt = make_plan(smoke("gt_sa"), problem, 0.5, profile);
  EXPECT_EQ(gt.dnss->batches, allocation::qm_batches(profile, 0.125).counts());

  const auto dsgt = make_plan(smoke("dsgt"), problem, 0.5, profile);
  EXPECT_EQ(dsgt.dnss->batches, allocation::uniform_batches(profile, 0.125).counts());
  EXPECT_EQ(dsgt.dnss->rounds, 1);
  EXPECT_EQ(dsgt.dnss->initial_rounds, 1);
  EXPECT_FALSE(dsgt.dnss->initial_rounds_rule);

  const auto vr = make_plan(smoke("dnss_vr"), problem, 0.5, profile);
  ASSERT_TRUE(vr.dnss_vr);
  EXPECT_EQ(vr.dnss_vr->big_batches, allocation::vr_schedule(profile, 0.5).big_batches);
}

TEST(MakePlan, OverridesAndManualMode) {
  auto cfg = smoke();
  auto problem = build_problem(cfg);
  const allocation::NoiseProfile profile{{1, 2, 3, 4}};
  cfg.algorithm.overrides.iterations = 7;
  cfg.algorithm.overrides.batch = 3;
  const auto plan = make_plan(cfg, problem, 0.5, profile);
  EXPECT_EQ(plan.dnss->iterations, 7);
  EXPECT_EQ(plan.dnss->batches, (std::vector<std::int64_t>(4, 3)));

  cfg.algorithm.schedule = config::ScheduleSource::manual;
  cfg.algorithm.overrides = {};
  cfg.algorithm.overrides.eta = 0.1;
  EXPECT_THROW(make_plan(cfg, problem, 0.5, profile), InvalidArgument);
}

TEST(Interpolate, StepsAndLines) {
  const auto r = synthetic({{0, 10.0}, {10, 8.0}, {20, 4.0}, {20, 3.0}, {40, 1.0}});
  auto g = [&](double s) { return interpolate(r.rows, s, &MetricRow::grad_norm_sq); };
  EXPECT_EQ(g(0), 10.0);
  EXPECT_EQ(g(5), 9.0);
  EXPECT_EQ(g(20), 3.0);
  EXPECT_EQ(g(30), 2.0);
  EXPECT_EQ(g(100), 1.0);
}

TEST(Aggregate, SingleRecordReproducesItsValues) {
  const auto r = synthetic({{0, 10.0}, {10, 8.0}, {100, 4.0}});
  const auto agg = aggregate({r}, 5);
  ASSERT_EQ(agg.points.size(), 5u);
  EXPECT_EQ(agg.points.front().samples, 10.0);
  EXPECT_EQ(agg.points.back().samples, 100.0);
  EXPECT_EQ(agg.points.front().grad_mean, 8.0);
  EXPECT_EQ(agg.points.back().grad_mean, 4.0);
  for (const auto& p : agg.points) {
    EXPECT_EQ(p.grad_std, 0.0);
    EXPECT_NEAR(p.f_mean, 2.0 * p.grad_mean, 1e-12);
    EXPECT_EQ(p.consensus_mean, 0.5);
  }
  EXPECT_NEAR(agg.points[2].samples, std::sqrt(10.0 * 100.0), 1e-9);
}

TEST(Aggregate, ConstantRunsGiveMeanAndPopulationStd) {
  const auto a = synthetic({{0, 1.0}, {10, 1.0}, {50, 1.0}});
  const auto b = synthetic({{0, 3.0}, {5, 3.0}, {80, 3.0}});
  const auto agg = aggregate({a, b});
  EXPECT_EQ(agg.runs, 2u);
  EXPECT_EQ(agg.points.size(), kGridPoints);
  EXPECT_EQ(agg.points.front().samples, 10.0);
  EXPECT_EQ(agg.points.back().samples, 50.0);
  for (const auto& p : agg.points) {
    EXPECT_DOUBLE_EQ(p.grad_mean, 2.0);
    EXPECT_DOUBLE_EQ(p.grad_std, 1.0);
  }
}

TEST(Aggregate, RejectsBadInput) {
  EXPECT_THROW(aggregate({}), InvalidArgument);
  EXPECT_THROW(aggregate({synthetic({{0, 1.0}, {5, 1.0}}), synthetic({{0, 1.0}, {5, 1.0}}, "g")}), InvalidArgument);
  EXPECT_THROW(aggregate({synthetic({{0, 1.0}})}), InvalidArgument);
  EXPECT_THROW(aggregate({synthetic({{0, 1.0}, {5, 1.0}}), synthetic({{0, 1.0}, {10, 1.0}, {20, 1.0}})}),
               InvalidArgument);
}

TEST(Aggregate, CsvLayout) {
  const auto agg = aggregate({synthetic({{0, 1.0}, {10, 1.0}, {50, 1.0}})}, 3);
  std::ostringstream out;
  write_aggregate_csv(agg, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# fingerprint=f");
  std::getline(in, line);
  EXPECT_EQ(line, "# algorithm=dnss");
  std::getline(in, line);
  EXPECT_EQ(line, "# runs=1");
  std::getline(in, line);
  EXPECT_EQ(line, kAggregateHeader);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}
