#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "dopt/data.hpp"
#include "dopt/rng.hpp"
#include "dopt/types.hpp"

namespace dopt {

/// Per-node first-order oracles for f(x) = (1/m) sum_i f_i(x).
///
/// Exact quantities (`local_value`, `local_grad`) are pure. Stochastic draws
/// go through `sample*`, which take an explicit RNG and bump node i's
/// counter by one per gradient evaluation. Distinct nodes may be sampled
/// from different threads; a single node may not.
class OracleSuite {
 public:
  OracleSuite(std::size_t nodes, std::size_t dim);
  virtual ~OracleSuite() = default;

  std::size_t nodes() const { return nodes_; }
  std::size_t dim() const { return dim_; }

  virtual double local_value(std::size_t node, const Vector& x) const = 0;
  virtual Vector local_grad(std::size_t node, const Vector& x) const = 0;

  double global_value(const Vector& x) const;
  Vector global_grad(const Vector& x) const;

  /// One stochastic gradient g_i(x; xi).
  Vector sample(std::size_t node, const Vector& x, Rng& rng);

  /// One draw of xi evaluated at every point: out[k] = g_i(points[k]; xi).
  /// Charges points.size() evaluations.
  void sample_shared(std::size_t node, std::span<const Vector> points, Rng& rng, std::span<Vector> out);

  /// Mean of `count` independent draws at x (count >= 1).
  Vector minibatch_mean(std::size_t node, const Vector& x, std::int64_t count, Rng& rng);

  std::uint64_t samples(std::size_t node) const { return counters_.at(node); }
  std::uint64_t total_samples() const;
  void reset_counters();

 protected:
  /// Draw xi once and write g_i(points[k]; xi) into out[k].
  virtual void draw(std::size_t node, std::span<const Vector> points, Rng& rng, std::span<Vector> out) = 0;

  void check_node(std::size_t node) const;

 private:
  std::size_t nodes_;
  std::size_t dim_;
  std::vector<std::uint64_t> counters_;
};

/// Gaussian vector with i.i.d. N(0, sigma^2/d) coordinates, so E||v||^2 = sigma^2.
void add_isotropic_noise(double sigma, Rng& rng, Vector& v);

// ---------------------------------------------------------------- quadratics

/// f_i(x) = 1/2 x^T A_i x - b_i^T x with additive Gaussian gradient noise.
struct QuadraticSpec {
  std::vector<Eigen::MatrixXd> A;
  std::vector<Vector> b;
  std::vector<double> sigmas;
};

class QuadraticSuite final : public OracleSuite {
 public:
  explicit QuadraticSuite(QuadraticSpec spec);

  double local_value(std::size_t node, const Vector& x) const override;
  Vector local_grad(std::size_t node, const Vector& x) const override;

  const QuadraticSpec& spec() const { return spec_; }
  const Eigen::MatrixXd& mean_hessian() const { return mean_a_; }
  /// lambda_max of the mean Hessian.
  double smoothness() const { return smoothness_; }
  /// sqrt((1/m) sum ||A_i||_2^2); the additive noise cancels in differences.
  double mean_squared_smoothness() const { return ms_smoothness_; }
  /// Minimizer and minimum of f; throws unless the mean Hessian is positive definite.
  Vector minimizer() const;
  double optimal_value() const;

 protected:
  void draw(std::size_t node, std::span<const Vector> points, Rng& rng, std::span<Vector> out) override;

 private:
  QuadraticSpec spec_;
  Eigen::MatrixXd mean_a_;
  double smoothness_ = 0.0;
  double ms_smoothness_ = 0.0;
};

struct RandomQuadraticOptions {
  std::size_t nodes = 4;
  std::size_t dim = 10;
  double smoothness = 1.0;  // lambda_max of the mean Hessian
  double strong_convexity = 0.2;  // lambda_min of the mean Hessian
  double delta = 1.0;  // f(0) - min f
  double heterogeneity = 0.5;  // fraction of lambda_min used for per-node perturbations
  std::vector<double> sigmas;
  std::uint64_t seed = 0;
};

/// Random heterogeneous quadratic with known L, Delta (at x0 = 0) and PSD local Hessians.
QuadraticSpec random_quadratic(const RandomQuadraticOptions& options);

std::unique_ptr<QuadraticSuite> quadratic_suite(QuadraticSpec spec);

// ------------------------------------------------------------------ logistic

/// f_i(x) = (1/N_i) sum_j log(1 + exp(-b_ij a_ij^T x)) + r sum_k x_k^2 / (1 + x_k^2).
struct LogisticSpec {
  std::vector<data::SparseDataset> shards;
  double reg = 1e-4;
  std::vector<double> sigmas;
};

/// Loss and gradient over one shard (all of its rows).
double logistic_value(const data::SparseDataset& shard, double reg, const Vector& x);
Vector logistic_grad(const data::SparseDataset& shard, double reg, const Vector& x);

class LogisticSuite final : public OracleSuite {
 public:
  explicit LogisticSuite(LogisticSpec spec);

  double local_value(std::size_t node, const Vector& x) const override;
  Vector local_grad(std::size_t node, const Vector& x) const override;

  const LogisticSpec& spec() const { return spec_; }
  /// Upper bound on the smoothness of f: lambda_max((1/m) sum_i A_i^T A_i / (4 N_i)) + 2r,
  /// with lambda_max from power iteration (inflated by 1e-6 relative).
  double smoothness_bound() const;
  /// Per-sample bound sqrt((1/m) sum_i mean_j (||a_ij||^2/4 + 2r)^2).
  double mean_squared_smoothness_bound() const;

 protected:
  void draw(std::size_t node, std::span<const Vector> points, Rng& rng, std::span<Vector> out) override;

 private:
  LogisticSpec spec_;
};

std::unique_ptr<LogisticSuite> logistic_suite(LogisticSpec spec);

}  // namespace dopt
