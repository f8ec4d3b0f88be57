#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dopt/types.hpp"

namespace dopt {
class OracleSuite;
}

namespace dopt::allocation {

/// Per-node standard deviations sigma_i of the stochastic gradient noise.
struct NoiseProfile {
  std::vector<double> sigmas;

  std::size_t nodes() const { return sigmas.size(); }
};

/// Per-node batch sizes. Exact plans carry real batches; every other
/// allocator returns whole numbers.
struct AllocationPlan {
  std::vector<double> batches;
  double total = 0.0;
  double mse_bound = 0.0;

  /// Batches as sample counts; throws unless every batch is a positive integer.
  std::vector<std::int64_t> counts() const;
};

struct MeanStats {
  double am = 0.0;   // arithmetic mean
  double qm = 0.0;   // quadratic mean
  double p23 = 0.0;  // 2/3-power mean
};

/// Upper bound (1/m^2) sum sigma_i^2 / B_i on the mean squared error of the
/// network-averaged mini-batch gradient.
double mse_bound(const NoiseProfile& profile, const std::vector<double>& batches);

/// Closed-form minimizer of sum B_i subject to mse_bound <= eps^2:
/// B_i = sigma_i sum_j sigma_j / (m^2 eps^2). Requires every sigma_i > 0.
AllocationPlan optimal_batches(const NoiseProfile& profile, double eps);

/// ceil(16 sigma_i sum_j sigma_j / (m^2 eps^2)), at least 1.
AllocationPlan proportional_batches(const NoiseProfile& profile, double eps);

/// Worst-case allocator: ceil(sigma_max^2 / (m eps^2)) on every node (at least 1).
AllocationPlan uniform_batches(const NoiseProfile& profile, double eps);

/// Quadratic-mean allocator: ceil(sigma_QM^2 / (m eps^2)) on every node (at least 1).
AllocationPlan qm_batches(const NoiseProfile& profile, double eps);

struct VrSchedule {
  std::vector<std::int64_t> big_batches;  // B_i
  std::int64_t mini_batch = 1;            // b
  double q = 1.0;
  double p = 1.0;

  std::int64_t total_big() const;
};

inline constexpr double kVrBatchConstant = 32.0;

/// B_i = max(ceil(c sigma_i sum_j sigma_j / (m^2 eps^2)), 1), b = ceil(sqrt(sum B)/m),
/// q = sqrt(sum B)/(b m), p = b q / (b q + sum B / m). `constant` defaults to 32.
VrSchedule vr_schedule(const NoiseProfile& profile, double eps, double constant = kVrBatchConstant);

MeanStats mean_stats(const NoiseProfile& profile);

/// Pilot estimate of each node's sigma: draw `n_pilot` stochastic gradients at
/// x0 and return sqrt(sum_j ||g_j - gbar||^2 / (n_pilot - 1)). Draws come from
/// streams derived from `seed` (distinct from the run streams) and are charged
/// to the suite's sample counters.
NoiseProfile estimate_sigmas(OracleSuite& suite, const Vector& x0, std::int64_t n_pilot, std::uint64_t seed);

}  // namespace dopt::allocation
