#include "dopt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <limits>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "dopt/allocation.hpp"
#include "dopt/data.hpp"
#include "dopt/error.hpp"
#include "dopt/hard_instance.hpp"
#include "dopt/schedules.hpp"

namespace dopt::experiment {
namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw Error(fmt::format("stage '{}': {}", name, e.what()));
  }
}

std::string resolve_path(const std::string& base, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || base.empty()) return p.string();
  return (std::filesystem::path(base) / p).string();
}

RunRecord run_on(const config::ExperimentConfig& cfg, const Network& net, std::uint64_t seed) {
  auto problem = stage("oracles", [&] { return build_problem(cfg); });
  const auto m = cfg.topology.spec.m;

  allocation::NoiseProfile profile{cfg.sigmas.resolve(m)};
  if (cfg.sigmas.estimate_pilot) {
    profile = stage("estimation", [&] {
      return allocation::estimate_sigmas(*problem.suite, problem.x0, *cfg.sigmas.estimate_pilot, seed);
    });
  }

  const auto plan = stage("schedule", [&] { return make_plan(cfg, problem, net.mixing.chi, profile); });

  return stage("run", [&] {
    algorithms::RunOptions opts;
    opts.seed = seed;
    opts.max_samples = cfg.max_samples.value_or(std::numeric_limits<std::uint64_t>::max());
    opts.x0 = problem.x0;
    opts.name = cfg.algorithm.name;
    RunRecord rec = plan.dnss_vr ? algorithms::dnss_vr_run(*problem.suite, net.mixing, *plan.dnss_vr, opts)
                                 : algorithms::dnss_run(*problem.suite, net.mixing, *plan.dnss, opts);
    rec.fingerprint = config::fingerprint(cfg);
    return rec;
  });
}

double population_std(const std::vector<double>& v, double mean) {
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

Network build_network(const config::ExperimentConfig& cfg) {
  return stage("topology", [&] {
    Network net;
    const auto& t = cfg.topology;
    if (t.calibrate) {
      topology::CalibrationOptions opt;
      opt.weighting = t.weighting;
      net.graph = topology::calibrate_random_graph(t.spec.m, t.calibrate->target_chi, t.calibrate->tol,
                                                   t.calibrate->seed, opt);
    } else {
      net.graph = topology::build_graph(t.spec);
    }
    net.mixing = topology::metropolis_weights(net.graph, t.weighting);
    return net;
  });
}

Problem build_problem(const config::ExperimentConfig& cfg) {
  const auto m = cfg.topology.spec.m;
  const auto sigmas = cfg.sigmas.resolve(m);
  Problem out;

  if (const auto* q = std::get_if<config::QuadraticProblem>(&cfg.problem)) {
    RandomQuadraticOptions opt;
    opt.nodes = m;
    opt.dim = q->dim;
    opt.smoothness = q->smoothness;
    opt.strong_convexity = q->strong_convexity;
    opt.delta = q->delta;
    opt.heterogeneity = q->heterogeneity;
    opt.sigmas = sigmas;
    opt.seed = q->seed;
    auto suite = quadratic_suite(random_quadratic(opt));
    out.x0 = Vector::Zero(static_cast<Eigen::Index>(q->dim));
    // The generator hits these exactly; recomputing them would only add round-off.
    out.delta = q->delta;
    out.smoothness = q->smoothness;
    out.lbar = suite->mean_squared_smoothness();
    out.suite = std::move(suite);
  } else if (const auto* l = std::get_if<config::LogisticProblem>(&cfg.problem)) {
    auto ds = data::read_libsvm_file(resolve_path(cfg.base_dir, l->dataset), l->dim);
    if (l->max_rows && *l->max_rows < ds.size()) {
      std::vector<std::size_t> head(*l->max_rows);
      for (std::size_t k = 0; k < head.size(); ++k) head[k] = k;
      ds = ds.subset(head);
    }
    const auto plan = data::partition(ds, m, l->partition, l->partition_seed);
    LogisticSpec spec;
    spec.reg = l->reg;
    spec.sigmas = sigmas;
    for (const auto& ids : plan.assignment) spec.shards.push_back(ds.subset(ids));
    auto suite = logistic_suite(std::move(spec));
    out.x0 = Vector::Zero(static_cast<Eigen::Index>(ds.dim));
    out.delta = suite->global_value(out.x0);
    out.smoothness = suite->smoothness_bound();
    out.lbar = suite->mean_squared_smoothness_bound();
    out.suite = std::move(suite);
  } else {
    const auto& h = std::get<config::HardInstanceProblem>(cfg.problem);
    hard::HardInstanceParams params;
    params.nodes = m;
    params.smoothness = h.smoothness;
    params.delta = h.delta;
    params.eps = cfg.eps;
    params.sigmas = sigmas;
    params.shares = h.shares;
    auto suite = hard::distributed_hard_instance(params);
    out.x0 = Vector::Zero(static_cast<Eigen::Index>(suite->dim()));
    out.delta = h.delta;
    out.smoothness = h.smoothness;
    out.suite = std::move(suite);
  }
  return out;
}

Plan make_plan(const config::ExperimentConfig& cfg, const Problem& problem, double chi,
               const allocation::NoiseProfile& profile) {
  const auto& a = cfg.algorithm;
  const auto& ov = a.overrides;
  const double delta = a.delta.value_or(problem.delta);
  const double L = a.smoothness.value_or(problem.smoothness);
  const bool theorem = a.schedule == config::ScheduleSource::theorem;
  const auto m = profile.nodes();

  const auto need = [&](bool present, const char* key) {
    detail::require(present, "schedule", fmt::format("manual schedule for {} needs overrides.{}", a.name, key));
  };

  Plan plan;
  plan.algorithm = a.name;

  if (a.name == "dnss_vr") {
    algorithms::DnssVrConfig c;
    if (theorem) {
      const auto lbar = a.lbar ? a.lbar : problem.lbar;
      detail::require(lbar.has_value(), "schedule",
                      "dnss_vr needs the mean-squared smoothness; set algorithm.lbar for this problem");
      c = schedules::vr_plan(delta, *lbar, profile, cfg.eps, chi, std::nullopt, a.rounds_scale,
                                     a.batch_constant);
    } else {
      need(ov.eta.has_value(), "eta");
      need(ov.iterations.has_value(), "iterations");
      need(ov.batches || ov.batch, "batches");
      need(ov.rounds.has_value(), "rounds");
      need(ov.mini_batch.has_value(), "mini_batch");
      need(ov.p.has_value(), "p");
      need(ov.q.has_value(), "q");
      c.initial_rounds = *ov.rounds;
    }
    if (ov.eta) c.eta = *ov.eta;
    if (ov.iterations) c.iterations = *ov.iterations;
    if (ov.batches) c.big_batches = *ov.batches;
    if (ov.batch) c.big_batches.assign(m, *ov.batch);
    if (ov.rounds) c.rounds = *ov.rounds;
    if (ov.initial_rounds) {
      c.initial_rounds = *ov.initial_rounds;
      c.initial_rounds_rule = nullptr;
    }
    if (ov.mini_batch) c.mini_batch = *ov.mini_batch;
    if (ov.p) c.p = *ov.p;
    if (ov.q) c.q = *ov.q;
    plan.dnss_vr = std::move(c);
    return plan;
  }

  algorithms::DnssConfig c;
  if (theorem) {
    schedules::BatchRule rule = schedules::BatchRule::optimal;
    if (a.name == "gt_sa") rule = schedules::BatchRule::qm;
    if (a.name == "uniform" || a.name == "dsgt") rule = schedules::BatchRule::uniform;
    c = schedules::dnss_plan(delta, L, profile, cfg.eps, chi, std::nullopt, a.rounds_scale, rule);
    if (a.name == "dsgt") {
      c.rounds = 1;
      c.initial_rounds = 1;
      c.initial_rounds_rule = nullptr;
    }
  } else {
    need(ov.eta.has_value(), "eta");
    need(ov.iterations.has_value(), "iterations");
    need(ov.batches || ov.batch, "batches");
    need(ov.rounds.has_value(), "rounds");
    c.initial_rounds = *ov.rounds;
  }
  if (ov.eta) c.eta = *ov.eta;
  if (ov.iterations) c.iterations = *ov.iterations;
  if (ov.batches) c.batches = *ov.batches;
  if (ov.batch) c.batches.assign(m, *ov.batch);
  if (ov.rounds) c.rounds = *ov.rounds;
  if (ov.initial_rounds) {
    c.initial_rounds = *ov.initial_rounds;
    c.initial_rounds_rule = nullptr;
  }
  plan.dnss = std::move(c);
  return plan;
}

RunRecord run_experiment(const config::ExperimentConfig& cfg, std::uint64_t seed) {
  const auto net = build_network(cfg);
  return run_on(cfg, net, seed);
}

std::size_t worker_count(std::size_t jobs) {
  std::size_t cap = 0;
  if (const char* env = std::getenv("DOPT_SIM_THREADS")) {
    char* end = nullptr;
    const auto v = std::strtoll(env, &end, 10);
    if (end == env || *end != '\0' || v < 0)
      throw InvalidArgument(fmt::format("DOPT_SIM_THREADS must be a nonnegative integer, got '{}'", env));
    cap = static_cast<std::size_t>(v);
  }
  if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(cap, jobs));
}

std::vector<RunRecord> run_seeds(const config::ExperimentConfig& cfg) {
  const auto net = build_network(cfg);
  const auto n = cfg.seeds.size();
  std::vector<RunRecord> records(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  const auto work = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        records[k] = run_on(cfg, net, cfg.seeds[k]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const auto workers = worker_count(n);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return records;
}

double interpolate(const std::vector<MetricRow>& rows, double s, double MetricRow::*metric) {
  detail::require(!rows.empty(), "aggregate", "record has no rows");
  const auto above = std::upper_bound(rows.begin(), rows.end(), s,
                                      [](double v, const MetricRow& r) { return v < static_cast<double>(r.samples); });
  if (above == rows.begin()) return rows.front().*metric;
  const auto& lo = *(above - 1);  // last row with samples <= s
  if (above == rows.end() || static_cast<double>(lo.samples) == s) return lo.*metric;
  const auto& hi = *above;
  const double x0 = static_cast<double>(lo.samples);
  const double x1 = static_cast<double>(hi.samples);
  const double w = (s - x0) / (x1 - x0);
  return (1.0 - w) * (lo.*metric) + w * (hi.*metric);
}

Aggregate aggregate(const std::vector<RunRecord>& records, std::size_t grid_points) {
  detail::require(!records.empty(), "aggregate", "no records to aggregate");
  detail::require(grid_points >= 1, "aggregate", "grid needs at least one point");
  Aggregate agg;
  agg.algorithm = records.front().algorithm;
  agg.fingerprint = records.front().fingerprint;
  agg.runs = records.size();

  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    if (r.fingerprint != agg.fingerprint)
      throw InvalidArgument(fmt::format("aggregate: fingerprint mismatch ({} vs {}, seed {})", agg.fingerprint,
                                        r.fingerprint, r.seed));
    detail::require(!r.rows.empty(), "aggregate", fmt::format("record for seed {} has no rows", r.seed));
    const auto first = std::find_if(r.rows.begin(), r.rows.end(), [](const MetricRow& row) { return row.samples > 0; });
    if (first == r.rows.end())
      throw InvalidArgument(fmt::format("aggregate: record for seed {} never drew a sample", r.seed));
    lo = std::max(lo, static_cast<double>(first->samples));
    hi = std::min(hi, static_cast<double>(r.rows.back().samples));
  }
  if (lo > hi) throw InvalidArgument("aggregate: records cover disjoint sample ranges");

  std::vector<double> grid;
  if (lo == hi || grid_points == 1) {
    grid.push_back(hi);
  } else {
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t k = 0; k < grid_points; ++k)
      grid.push_back(std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(grid_points - 1)));
    grid.front() = lo;
    grid.back() = hi;
  }

  std::vector<double> g(records.size()), f(records.size()), c(records.size());
  for (double s : grid) {
    for (std::size_t k = 0; k < records.size(); ++k) {
      g[k] = interpolate(records[k].rows, s, &MetricRow::grad_norm_sq);
      f[k] = interpolate(records[k].rows, s, &MetricRow::f_value);
      c[k] = interpolate(records[k].rows, s, &MetricRow::consensus_err);
    }
    AggregatePoint p;
    p.samples = s;
    p.grad_mean = mean_of(g);
    p.grad_std = population_std(g, p.grad_mean);
    p.f_mean = mean_of(f);
    p.f_std = population_std(f, p.f_mean);
    p.consensus_mean = mean_of(c);
    p.consensus_std = population_std(c, p.consensus_mean);
    agg.points.push_back(p);
  }
  return agg;
}

void write_aggregate_csv(const Aggregate& agg, std::ostream& out) {
  out << "# fingerprint=" << agg.fingerprint << '\n';
  out << "# algorithm=" << agg.algorithm << '\n';
  out << "# runs=" << agg.runs << '\n';
  out << kAggregateHeader << '\n';
  for (const auto& p : agg.points)
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", p.samples, p.grad_mean,
                       p.grad_std, p.f_mean, p.f_std, p.consensus_mean, p.consensus_std);
}

}  // namespace dopt::experiment
