#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dopt/algorithms.hpp"
#include "dopt/config.hpp"
#include "dopt/oracles.hpp"
#include "dopt/record.hpp"
#include "dopt/topology.hpp"

namespace dopt::experiment {

/// Objects every run of one config shares: graph, mixing matrix and the
/// problem constants the theorem schedules need.
struct Network {
  topology::Graph graph;
  topology::MixingMatrix mixing;
};

Network build_network(const config::ExperimentConfig& cfg);

struct Problem {
  std::unique_ptr<OracleSuite> suite;
  Vector x0;
  double delta = 0.0;              // f(x0) - inf f, or an upper bound
  double smoothness = 0.0;         // L
  std::optional<double> lbar;      // mean-squared smoothness, when known
};

/// Fresh oracle suite (zeroed counters) with the config's injected noise levels.
Problem build_problem(const config::ExperimentConfig& cfg);

/// Allocation/step/round settings for the configured algorithm. `profile` is the
/// noise profile used for allocation (true or estimated).
struct Plan {
  std::string algorithm;
  std::optional<algorithms::DnssConfig> dnss;      // every tracking variant except dnss_vr
  std::optional<algorithms::DnssVrConfig> dnss_vr;
};

Plan make_plan(const config::ExperimentConfig& cfg, const Problem& problem, double chi,
               const allocation::NoiseProfile& profile);

/// topology -> oracles -> (optional sigma estimation) -> allocation -> schedule -> run.
/// Failures are rethrown as dopt::Error naming the stage. Deterministic in (cfg, seed).
RunRecord run_experiment(const config::ExperimentConfig& cfg, std::uint64_t seed);

/// Runs every seed of `cfg`; concurrency is capped by DOPT_SIM_THREADS (0 or unset = hardware).
std::vector<RunRecord> run_seeds(const config::ExperimentConfig& cfg);

/// Worker count implied by DOPT_SIM_THREADS for `jobs` tasks.
std::size_t worker_count(std::size_t jobs);

struct AggregatePoint {
  double samples = 0.0;
  double grad_mean = 0.0, grad_std = 0.0;
  double f_mean = 0.0, f_std = 0.0;
  double consensus_mean = 0.0, consensus_std = 0.0;
};

struct Aggregate {
  std::string algorithm;
  std::string fingerprint;
  std::size_t runs = 0;
  std::vector<AggregatePoint> points;
};

inline constexpr std::size_t kGridPoints = 200;

/// Mean and population std of each metric on a shared log-spaced sample grid
/// spanning the range every record covers, by linear interpolation in samples.
/// Throws on empty input or mismatched fingerprints.
Aggregate aggregate(const std::vector<RunRecord>& records, std::size_t grid_points = kGridPoints);

inline constexpr const char* kAggregateHeader =
    "samples,grad_norm_sq_mean,grad_norm_sq_std,f_value_mean,f_value_std,consensus_err_mean,consensus_err_std";

void write_aggregate_csv(const Aggregate& agg, std::ostream& out);

/// Piecewise-linear value of `metric` at sample count `s`; rows must be sorted by
/// samples. Among rows with equal sample counts the latest wins. Clamps outside
/// the covered range.
double interpolate(const std::vector<MetricRow>& rows, double s, double MetricRow::*metric);

}  // namespace dopt::experiment
