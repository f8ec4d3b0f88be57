#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dopt/data.hpp"
#include "dopt/schedules.hpp"
#include "dopt/topology.hpp"

namespace dopt::config {

struct QuadraticProblem {
  std::size_t dim = 10;
  double smoothness = 1.0;
  double strong_convexity = 0.2;
  double delta = 1.0;
  double heterogeneity = 0.5;
  std::uint64_t seed = 0;
};

struct LogisticProblem {
  std::string dataset;                     // LIBSVM text, optionally .gz; relative to the config file
  std::optional<std::size_t> dim;          // feature-count override
  std::optional<std::size_t> max_rows;     // keep only the first rows
  data::PartitionScheme partition = data::PartitionScheme::uniform_shuffle;
  std::uint64_t partition_seed = 0;
  double reg = 1e-4;
};

struct HardInstanceProblem {
  double smoothness = 1.0;
  double delta = 1.0;
  std::vector<double> shares;  // empty = uniform
};

using Problem = std::variant<QuadraticProblem, LogisticProblem, HardInstanceProblem>;

std::string problem_kind(const Problem& p);

struct Calibration {
  double target_chi = 0.41;
  double tol = 0.05;
  std::uint64_t seed = 0;
};

struct TopologyConfig {
  topology::TopologySpec spec;
  std::optional<Calibration> calibrate;  // replaces edge_prob by a bisection search
  topology::Weighting weighting = topology::Weighting::metropolis;
};

enum class SigmaKind { explicit_list, geometric, linear };

struct SigmaSchedule {
  SigmaKind kind = SigmaKind::explicit_list;
  std::vector<double> values;        // explicit_list
  double base = 1.0, ratio = 1.0;    // geometric: base * ratio^i
  double first = 1.0, last = 1.0;    // linear: evenly spaced from first to last
  std::optional<std::int64_t> estimate_pilot;  // allocate from pilot estimates instead of the injected values

  /// The injected noise levels for m nodes.
  std::vector<double> resolve(std::size_t m) const;
};

enum class ScheduleSource { theorem, manual };

struct Overrides {
  std::optional<double> eta;
  std::optional<std::int64_t> iterations;
  std::optional<std::vector<std::int64_t>> batches;
  std::optional<std::int64_t> batch;  // same batch on every node
  std::optional<std::int64_t> rounds;
  std::optional<std::int64_t> initial_rounds;
  std::optional<std::int64_t> mini_batch;
  std::optional<double> p;
  std::optional<double> q;
};

struct AlgorithmConfig {
  std::string name = "dnss";  // dnss | dnss_vr | gt_sa | uniform | dsgt
  ScheduleSource schedule = ScheduleSource::theorem;
  double rounds_scale = 1.0;
  double batch_constant = allocation::kVrBatchConstant;
  std::optional<double> delta;  // problem constants used by the theorem schedules
  std::optional<double> smoothness;
  std::optional<double> lbar;
  Overrides overrides;
};

inline const std::vector<std::string> kAlgorithms = {"dnss", "dnss_vr", "gt_sa", "uniform", "dsgt"};

struct ExperimentConfig {
  Problem problem;
  TopologyConfig topology;
  SigmaSchedule sigmas;
  double eps = 0.5;
  AlgorithmConfig algorithm;
  std::vector<std::uint64_t> seeds;
  std::optional<std::uint64_t> max_samples;
  std::string output = "out";
  std::string base_dir;  // directory of the config file; relative paths resolve against it
};

/// Parses JSON text (comments allowed). Unknown keys anywhere are reported
/// together in one ParseError; semantic problems raise InvalidArgument.
ExperimentConfig parse(const std::string& text, const std::string& base_dir = ".");
ExperimentConfig load(const std::string& path);

/// Canonical JSON of everything that affects a single run (seeds and output excluded).
std::string canonical(const ExperimentConfig& cfg);

/// 16 hex digits of FNV-1a over canonical(cfg).
std::string fingerprint(const ExperimentConfig& cfg);

/// Copy of `cfg` targeting another algorithm with its theorem schedule.
ExperimentConfig with_algorithm(const ExperimentConfig& cfg, const std::string& name);

}  // namespace dopt::config
