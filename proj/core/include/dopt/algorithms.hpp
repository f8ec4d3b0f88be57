#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dopt/consensus.hpp"
#include "dopt/oracles.hpp"
#include "dopt/record.hpp"
#include "dopt/topology.hpp"

namespace dopt::algorithms {

/// Maps sum_i ||y_i^0||^2 to the initial communication round count R0.
using InitialRoundsRule = std::function<std::int64_t(double y0_sq_sum)>;

struct DnssConfig {
  double eta = 0.0;
  std::vector<std::int64_t> batches;  // B_i
  std::int64_t iterations = 1;        // T
  std::int64_t initial_rounds = 0;    // R0, used when no rule is set
  std::int64_t rounds = 0;            // R_t for t >= 1
  InitialRoundsRule initial_rounds_rule;
};

struct DnssVrConfig {
  double eta = 0.0;
  std::vector<std::int64_t> big_batches;  // B_i
  std::int64_t mini_batch = 1;            // b
  double p = 1.0;
  double q = 1.0;
  std::int64_t iterations = 1;
  std::int64_t initial_rounds = 0;
  std::int64_t rounds = 0;
  InitialRoundsRule initial_rounds_rule;
};

/// Simulation state after iteration t (X holds x^{t+1}; Y and S hold y^t, s^t).
struct RunState {
  NodeMatrix X, X_prev, Y, Y_prev, S;
  std::int64_t t = -1;
  std::uint64_t samples = 0;
  std::int64_t comm_rounds = 0;
};

using Observer = std::function<void(const RunState&)>;

struct RunOptions {
  std::uint64_t seed = 0;
  std::uint64_t max_samples = std::numeric_limits<std::uint64_t>::max();
  Vector x0;  // empty = zeros
  Observer observer;
  std::string name;  // algorithm label stored in the record; defaults per entry point
};

/// D-NSS: node-specific mini-batches with gradient tracking and two FastMix
/// calls per iteration (R0 rounds at t = 0, R_t afterwards).
RunRecord dnss_run(OracleSuite& suite, const topology::MixingMatrix& w, const DnssConfig& cfg, const RunOptions& options);

/// D-NSS-VR: probabilistic switch between large batches (prob p) and the
/// recursive mini-batch estimator with per-node skip coins (prob q).
RunRecord dnss_vr_run(OracleSuite& suite, const topology::MixingMatrix& w, const DnssVrConfig& cfg, const RunOptions& options);

/// D-NSS skeleton fed with a quadratic-mean allocation.
RunRecord gt_sa_run(OracleSuite& suite, const topology::MixingMatrix& w, const DnssConfig& cfg, const RunOptions& options);

/// Gradient-tracking SGD: same batch B on every node, one gossip round per FastMix call.
RunRecord dsgt_run(OracleSuite& suite, const topology::MixingMatrix& w, double eta, std::int64_t batch, std::int64_t iterations,
                   const RunOptions& options);

/// One node's recursive update: draw omega ~ Bernoulli(q); if 1, draw b samples
/// shared between x and x_prev and return y_prev + (1/(b q)) sum (g(x) - g(x_prev)),
/// otherwise return y_prev. Charges 2b evaluations when omega = 1.
Vector recursive_estimate(OracleSuite& suite, std::size_t node, const Vector& x, const Vector& x_prev, const Vector& y_prev,
                          std::int64_t mini_batch, double q, Rng& rng);

}  // namespace dopt::algorithms
