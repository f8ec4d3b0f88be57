#pragma once

#include <cmath>
#include <cstdint>

#include "dopt/topology.hpp"
#include "dopt/types.hpp"

namespace dopt::consensus {

/// FastMix contraction constants: ||Z^R - 1 zbar|| <= rho(R, chi) ||Z^0 - 1 zbar||
/// with rho(R, chi) = c1 (1 - c2 sqrt(chi))^R.
struct ContractionParams {
  static inline const double c1 = std::sqrt(14.0);
  static inline const double c2 = 1.0 - 1.0 / std::sqrt(2.0);

  static double rho(std::int64_t rounds, double chi);
};

/// Momentum (Chebyshev-type) multi-round gossip over a fixed mixing matrix.
///
/// Each round computes z^{r+1} = (1 + eta) W z^r - eta z^{r-1} with
/// eta = (1 - sqrt(1 - lambda2^2)) / (1 + sqrt(1 - lambda2^2)) and
/// z^0 = z^{-1} = input. The row mean is preserved exactly in exact
/// arithmetic. Work buffers are kept between calls, so one Mixer per
/// simulation avoids per-round allocation. Not thread-safe.
class Mixer {
 public:
  explicit Mixer(const topology::MixingMatrix& w);

  /// Replace `z` by FastMix(z, W, rounds); adds `rounds` to the round counter.
  void mix(NodeMatrix& z, std::int64_t rounds);

  double momentum() const { return eta_; }
  std::int64_t rounds_used() const { return rounds_; }
  std::size_t nodes() const { return static_cast<std::size_t>(w_.rows()); }

 private:
  Eigen::MatrixXd w_;
  double eta_ = 0.0;
  std::int64_t rounds_ = 0;
  NodeMatrix prev_, next_;
};

/// Momentum used by FastMix for a given lambda2; negative lambda2 is clamped to 0.
double fastmix_momentum(double lambda2);

/// Stateless FastMix; throws on a row-count mismatch or negative rounds.
NodeMatrix fastmix(const NodeMatrix& z0, const topology::MixingMatrix& w, std::int64_t rounds);

/// Frobenius norm of Z - 1 zbar.
double consensus_error(const NodeMatrix& z);

/// Smallest R >= 0 with rho(R, chi) <= target_rho. Throws for chi outside (0, 1]
/// or target_rho <= 0.
std::int64_t rounds_for_target(double chi, double target_rho);

}  // namespace dopt::consensus
