#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "dopt/oracles.hpp"

namespace dopt::hard {

/// Constants of the zero-chain construction: F_D(0) - inf F_D <= kDelta0 * D,
/// grad F_D is kEll1-Lipschitz, and the G_D variance is <= kA^2 (1 - p) / p.
inline constexpr double kDelta0 = 12.0;
inline constexpr double kEll1 = 152.0;
inline constexpr double kA = 23.0;

/// psi(t) = 0 for t <= 1/2, exp(1 - 1/(2t - 1)^2) otherwise.
double psi(double t);
double psi_prime(double t);
/// phi(t) = int_{-inf}^t exp(-s^2/2) ds = sqrt(pi/2) erfc(-t/sqrt(2)).
double phi(double t);
double phi_prime(double t);

using ConstRef = Eigen::Ref<const Vector>;

/// F_D(x) = -psi(1) phi(x_1) + sum_{i=2}^D [psi(-x_{i-1}) phi(-x_i) - psi(x_{i-1}) phi(x_i)].
double chain_value(const ConstRef& x);
Vector chain_grad(const ConstRef& x);

/// Largest 1-based index with a nonzero coordinate; 0 for the zero vector.
std::size_t prog0(const ConstRef& x);

/// G_D for a given coin: coordinates past prog0(x) are scaled by xi/p.
Vector chain_stochastic_grad(const ConstRef& x, double p, bool xi);
/// Draws xi ~ Bernoulli(p) and returns G_D(x, xi; p). `xi_out` receives the coin.
Vector chain_sample(const ConstRef& x, double p, Rng& rng, bool* xi_out = nullptr);

struct HardInstanceParams {
  std::size_t nodes = 1;
  double smoothness = 1.0;  // L
  double delta = 1.0;       // target f(0) - inf f
  double eps = 0.01;
  std::vector<double> sigmas;  // all > 0
  std::vector<double> shares;  // c_i > 0, sum 1; empty = uniform 1/m
};

/// Node i owns coordinates [offset, offset + length) of the global vector.
struct Block {
  std::size_t offset = 0;
  std::size_t length = 0;  // D_i
  double scale = 0.0;      // lambda_i
  double p = 1.0;          // p_i
};

/// f_i(x) = (m L lambda_i^2 / l) F_{D_i}(U_i x / lambda_i) with disjoint coordinate
/// blocks as U_i, and g_i = (m L lambda_i / l) U_i^T G_{D_i}(U_i x / lambda_i, xi; p_i).
class HardInstanceSuite final : public OracleSuite {
 public:
  HardInstanceSuite(std::vector<Block> blocks, double smoothness, std::vector<double> sigmas);

  double local_value(std::size_t node, const Vector& x) const override;
  Vector local_grad(std::size_t node, const Vector& x) const override;

  const std::vector<Block>& blocks() const { return blocks_; }
  double smoothness() const { return smoothness_; }
  const std::vector<double>& sigmas() const { return sigmas_; }
  /// Multiplier m L lambda_i / l applied to chain gradients of node i.
  double gradient_scale(std::size_t node) const;
  /// Node i's block of x divided by lambda_i.
  Vector chain_coordinates(std::size_t node, const Vector& x) const;
  /// prog0 of node i's chain coordinates.
  std::size_t chain_progress(std::size_t node, const Vector& x) const;
  /// Number of draws at node i whose coin came up 1.
  std::uint64_t successes(std::size_t node) const { return successes_.at(node); }

 protected:
  void draw(std::size_t node, std::span<const Vector> points, Rng& rng, std::span<Vector> out) override;

 private:
  std::vector<Block> blocks_;
  double smoothness_;
  std::vector<double> sigmas_;
  std::vector<std::uint64_t> successes_;
};

/// Build the heterogeneous-variance hard instance:
/// lambda_i = (l / (sqrt(m) L)) sqrt(sigma_i / sigma_AM) 2 eps,
/// 1/p_i = sigma_i sigma_AM / (4 m a^2 eps^2) + 1,
/// D_i = floor(Delta L / (4 Delta0 l eps^2) (sigma_AM / sigma_i) m c_i), with l = l1.
/// Throws naming the node when some D_i < 1.
std::unique_ptr<HardInstanceSuite> distributed_hard_instance(const HardInstanceParams& params);

struct ChainDemoOptions {
  std::size_t trials = 100;
  double budget_fraction = 0.99;  // draws per node = floor(fraction * (D_i - 1) / (2 p_i))
  std::uint64_t seed = 0;
};

struct ChainDemoReport {
  std::size_t node = 0;
  std::size_t chain_length = 0;  // D_i
  double p = 1.0;
  double threshold = 0.0;        // (D_i - 1) / (2 p_i)
  std::uint64_t draws = 0;       // per trial
  double mean_progress = 0.0;
  std::size_t max_progress = 0;
  std::size_t trials = 0;
  std::size_t below_end = 0;     // trials whose final prog0 < D_i
  bool zero_chain_held = true;   // prog0 never exceeded the count of xi = 1 draws
};

/// Per node, run stochastic gradient steps of unit length in chain coordinates
/// (x <- x - (l / (m L)) g_i(x)) from x = 0 for `draws` oracle calls, and
/// record how far along the chain each trial got.
std::vector<ChainDemoReport> run_chain_demo(const HardInstanceParams& params, const ChainDemoOptions& options);

}  // namespace dopt::hard
