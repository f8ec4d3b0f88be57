#include "dopt/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <fmt/format.h>

#include "dopt/error.hpp"

namespace dopt {

// ---------------------------------------------------------------- base class

OracleSuite::OracleSuite(std::size_t nodes, std::size_t dim) : nodes_(nodes), dim_(dim), counters_(nodes, 0) {
  detail::require(nodes >= 1, "oracle", "need at least one node");
  detail::require(dim >= 1, "oracle", "dimension must be >= 1");
}

void OracleSuite::check_node(std::size_t node) const {
  if (node >= nodes_) throw InvalidArgument(fmt::format("oracle: node {} out of range (m = {})", node, nodes_));
}

double OracleSuite::global_value(const Vector& x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes_; ++i) acc += local_value(i, x);
  return acc / static_cast<double>(nodes_);
}

Vector OracleSuite::global_grad(const Vector& x) const {
  Vector acc = Vector::Zero(static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < nodes_; ++i) acc += local_grad(i, x);
  return acc / static_cast<double>(nodes_);
}

Vector OracleSuite::sample(std::size_t node, const Vector& x, Rng& rng) {
  Vector out;
  sample_shared(node, std::span<const Vector>(&x, 1), rng, std::span<Vector>(&out, 1));
  return out;
}

void OracleSuite::sample_shared(std::size_t node, std::span<const Vector> points, Rng& rng, std::span<Vector> out) {
  check_node(node);
  detail::require(points.size() == out.size(), "oracle", "points/out size mismatch");
  for (const auto& p : points)
    if (static_cast<std::size_t>(p.size()) != dim_)
      throw InvalidArgument(fmt::format("oracle: point has dimension {}, expected {}", p.size(), dim_));
  draw(node, points, rng, out);
  counters_[node] += points.size();
}

Vector OracleSuite::minibatch_mean(std::size_t node, const Vector& x, std::int64_t count, Rng& rng) {
  detail::require(count >= 1, "oracle", "mini-batch size must be >= 1");
  Vector acc = Vector::Zero(static_cast<Eigen::Index>(dim_));
  Vector g;
  for (std::int64_t k = 0; k < count; ++k) {
    sample_shared(node, std::span<const Vector>(&x, 1), rng, std::span<Vector>(&g, 1));
    acc += g;
  }
  return acc / static_cast<double>(count);
}

std::uint64_t OracleSuite::total_samples() const {
  return std::accumulate(counters_.begin(), counters_.end(), std::uint64_t{0});
}

void OracleSuite::reset_counters() { std::fill(counters_.begin(), counters_.end(), 0); }

void add_isotropic_noise(double sigma, Rng& rng, Vector& v) {
  if (sigma == 0.0) return;
  boost::random::normal_distribution<double> normal(0.0, sigma / std::sqrt(static_cast<double>(v.size())));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] += normal(rng);
}

// ---------------------------------------------------------------- quadratics

QuadraticSuite::QuadraticSuite(QuadraticSpec spec)
    : OracleSuite(spec.A.size(), spec.A.empty() ? 1 : static_cast<std::size_t>(spec.A.front().rows())), spec_(std::move(spec)) {
  const std::size_t m = spec_.A.size();
  const auto d = static_cast<Eigen::Index>(dim());
  if (spec_.b.size() != m || spec_.sigmas.size() != m)
    throw InvalidArgument(fmt::format("quadratic_suite: {} Hessians, {} offsets, {} sigmas", m, spec_.b.size(), spec_.sigmas.size()));
  mean_a_ = Eigen::MatrixXd::Zero(d, d);
  double ms = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& a = spec_.A[i];
    if (a.rows() != d || a.cols() != d || spec_.b[i].size() != d)
      throw InvalidArgument(fmt::format("quadratic_suite: node {} has inconsistent dimensions", i));
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()))
      throw InvalidArgument(fmt::format("quadratic_suite: A_{} is not symmetric", i));
    if (!(spec_.sigmas[i] >= 0.0)) throw InvalidArgument(fmt::format("quadratic_suite: sigma[{}] is negative", i));
    mean_a_ += a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    const double norm2 = es.eigenvalues().cwiseAbs().maxCoeff();
    ms += norm2 * norm2;
  }
  mean_a_ /= static_cast<double>(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mean_a_, Eigen::EigenvaluesOnly);
  smoothness_ = es.eigenvalues().cwiseAbs().maxCoeff();
  ms_smoothness_ = std::sqrt(ms / static_cast<double>(m));
}

double QuadraticSuite::local_value(std::size_t node, const Vector& x) const {
  check_node(node);
  return 0.5 * x.dot(spec_.A[node] * x) - spec_.b[node].dot(x);
}

Vector QuadraticSuite::local_grad(std::size_t node, const Vector& x) const {
  check_node(node);
  return spec_.A[node] * x - spec_.b[node];
}

Vector QuadraticSuite::minimizer() const {
  Vector bbar = Vector::Zero(mean_a_.rows());
  for (const auto& b : spec_.b) bbar += b;
  bbar /= static_cast<double>(spec_.b.size());
  Eigen::LLT<Eigen::MatrixXd> llt(mean_a_);
  if (llt.info() != Eigen::Success) throw Error("quadratic_suite: mean Hessian is not positive definite");
  return llt.solve(bbar);
}

double QuadraticSuite::optimal_value() const { return global_value(minimizer()); }

void QuadraticSuite::draw(std::size_t node, std::span<const Vector> points, Rng& rng, std::span<Vector> out) {
  Vector noise = Vector::Zero(static_cast<Eigen::Index>(dim()));
  add_isotropic_noise(spec_.sigmas[node], rng, noise);
  for (std::size_t k = 0; k < points.size(); ++k) out[k] = local_grad(node, points[k]) + noise;
}

std::unique_ptr<QuadraticSuite> quadratic_suite(QuadraticSpec spec) { return std::make_unique<QuadraticSuite>(std::move(spec)); }

QuadraticSpec random_quadratic(const RandomQuadraticOptions& o) {
  detail::require(o.nodes >= 1 && o.dim >= 1, "random_quadratic", "nodes and dim must be >= 1");
  detail::require(o.smoothness > 0.0 && o.strong_convexity > 0.0 && o.strong_convexity <= o.smoothness,
                  "random_quadratic", "need 0 < strong_convexity <= smoothness");
  detail::require(o.delta >= 0.0, "random_quadratic", "delta must be >= 0");
  detail::require(o.heterogeneity >= 0.0 && o.heterogeneity < 1.0, "random_quadratic", "heterogeneity must be in [0, 1)");
  detail::require(o.sigmas.size() == o.nodes, "random_quadratic", "need one sigma per node");
  const auto d = static_cast<Eigen::Index>(o.dim);
  Rng rng(mix_seed(o.seed));
  boost::random::normal_distribution<double> normal;
  auto gaussian_matrix = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd g(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) g(i, j) = normal(rng);
    return g;
  };

  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian_matrix(d, d)).householderQ();
  Vector spectrum(d);
  for (Eigen::Index k = 0; k < d; ++k)
    spectrum[k] = d == 1 ? o.smoothness
                         : o.strong_convexity + (o.smoothness - o.strong_convexity) * static_cast<double>(k) / static_cast<double>(d - 1);
  const Eigen::MatrixXd mean_a = q * spectrum.asDiagonal() * q.transpose();

  // Zero-mean symmetric perturbations, scaled so every A_i stays positive definite.
  std::vector<Eigen::MatrixXd> pert(o.nodes, Eigen::MatrixXd::Zero(d, d));
  if (o.nodes > 1 && o.heterogeneity > 0.0) {
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(d, d);
    for (auto& p : pert) {
      Eigen::MatrixXd g = gaussian_matrix(d, d);
      p = 0.5 * (g + g.transpose());
      avg += p;
    }
    avg /= static_cast<double>(o.nodes);
    double worst = 0.0;
    for (auto& p : pert) {
      p -= avg;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p, Eigen::EigenvaluesOnly);
      worst = std::max(worst, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    if (worst > 0.0)
      for (auto& p : pert) p *= o.heterogeneity * o.strong_convexity / worst;
  }

  Vector dir(d);
  for (Eigen::Index k = 0; k < d; ++k) dir[k] = normal(rng);
  dir.normalize();
  const double curvature = dir.dot(mean_a.llt().solve(dir));
  const Vector bbar = std::sqrt(2.0 * o.delta / curvature) * dir;

  QuadraticSpec spec;
  spec.sigmas = o.sigmas;
  Vector offset_sum = Vector::Zero(d);
  std::vector<Vector> offsets(o.nodes);
  for (auto& e : offsets) {
    e.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) e[k] = normal(rng);
    offset_sum += e;
  }
  for (std::size_t i = 0; i < o.nodes; ++i) {
    spec.A.push_back(mean_a + pert[i]);
    // Symmetrize to clear round-off from the products above.
    spec.A.back() = 0.5 * (spec.A.back() + spec.A.back().transpose()).eval();
    Vector e = o.nodes > 1 ? Vector(offsets[i] - offset_sum / static_cast<double>(o.nodes)) : Vector(Vector::Zero(d));
    spec.b.push_back(bbar + bbar.norm() * e / std::sqrt(static_cast<double>(o.dim)));
  }
  return spec;
}

// ------------------------------------------------------------------ logistic

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// 1 / (1 + exp(-z)) without overflow.
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double regularizer_value(double reg, const Vector& x) {
  if (reg == 0.0) return 0.0;
  const auto sq = x.array().square();
  return reg * (sq / (1.0 + sq)).sum();
}

void add_regularizer_grad(double reg, const Vector& x, Vector& g) {
  if (reg == 0.0) return;
  const auto denom = (1.0 + x.array().square()).square();
  g.array() += 2.0 * reg * x.array() / denom;
}

// Gradient of the single-sample loss log(1 + exp(-b a^T x)).
void add_sample_grad(const data::SparseRow& row, int label, const Vector& x, Vector& g) {
  const double margin = static_cast<double>(label) * row.dot(x);
  row.axpy(-static_cast<double>(label) * sigmoid(-margin), g);
}

}  // namespace

double logistic_value(const data::SparseDataset& shard, double reg, const Vector& x) {
  detail::require(shard.size() >= 1, "logistic", "empty shard");
  double loss = 0.0;
  for (std::size_t j = 0; j < shard.size(); ++j) loss += softplus(-static_cast<double>(shard.labels[j]) * shard.rows[j].dot(x));
  return loss / static_cast<double>(shard.size()) + regularizer_value(reg, x);
}

Vector logistic_grad(const data::SparseDataset& shard, double reg, const Vector& x) {
  detail::require(shard.size() >= 1, "logistic", "empty shard");
  Vector g = Vector::Zero(x.size());
  for (std::size_t j = 0; j < shard.size(); ++j) add_sample_grad(shard.rows[j], shard.labels[j], x, g);
  g /= static_cast<double>(shard.size());
  add_regularizer_grad(reg, x, g);
  return g;
}

LogisticSuite::LogisticSuite(LogisticSpec spec)
    : OracleSuite(spec.shards.size(), spec.shards.empty() ? 1 : std::max<std::size_t>(1, spec.shards.front().dim)),
      spec_(std::move(spec)) {
  if (spec_.sigmas.size() != spec_.shards.size())
    throw InvalidArgument(fmt::format("logistic_suite: {} shards but {} sigmas", spec_.shards.size(), spec_.sigmas.size()));
  detail::require(spec_.reg >= 0.0, "logistic_suite", "regularization must be >= 0");
  for (std::size_t i = 0; i < spec_.shards.size(); ++i) {
    if (spec_.shards[i].size() == 0) throw InvalidArgument(fmt::format("logistic_suite: shard {} is empty", i));
    if (spec_.shards[i].dim != dim()) throw InvalidArgument(fmt::format("logistic_suite: shard {} has a different dimension", i));
    if (!(spec_.sigmas[i] >= 0.0)) throw InvalidArgument(fmt::format("logistic_suite: sigma[{}] is negative", i));
  }
}

double LogisticSuite::local_value(std::size_t node, const Vector& x) const {
  check_node(node);
  return logistic_value(spec_.shards[node], spec_.reg, x);
}

Vector LogisticSuite::local_grad(std::size_t node, const Vector& x) const {
  check_node(node);
  return logistic_grad(spec_.shards[node], spec_.reg, x);
}

void LogisticSuite::draw(std::size_t node, std::span<const Vector> points, Rng& rng, std::span<Vector> out) {
  const auto& shard = spec_.shards[node];
  boost::random::uniform_int_distribution<std::size_t> pick(0, shard.size() - 1);
  const std::size_t j = pick(rng);
  Vector noise = Vector::Zero(static_cast<Eigen::Index>(dim()));
  add_isotropic_noise(spec_.sigmas[node], rng, noise);
  for (std::size_t k = 0; k < points.size(); ++k) {
    out[k] = noise;
    add_sample_grad(shard.rows[j], shard.labels[j], points[k], out[k]);
    add_regularizer_grad(spec_.reg, points[k], out[k]);
  }
}

double LogisticSuite::smoothness_bound() const {
  const auto d = static_cast<Eigen::Index>(dim());
  const double m = static_cast<double>(nodes());
  auto apply = [&](const Vector& v) {
    Vector out = Vector::Zero(d);
    for (const auto& shard : spec_.shards) {
      const double w = 1.0 / (4.0 * static_cast<double>(shard.size()) * m);
      for (const auto& row : shard.rows) row.axpy(w * row.dot(v), out);
    }
    return out;
  };
  Vector v = Vector::Ones(d).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    Vector w = apply(v);
    const double next = v.dot(w);
    const double n = w.norm();
    if (n == 0.0) break;
    v = w / n;
    if (std::abs(next - lambda) <= 1e-12 * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda * (1.0 + 1e-6) + 2.0 * spec_.reg;
}

double LogisticSuite::mean_squared_smoothness_bound() const {
  double acc = 0.0;
  for (const auto& shard : spec_.shards) {
    double node = 0.0;
    for (const auto& row : shard.rows) {
      const double l = row.squared_norm() / 4.0 + 2.0 * spec_.reg;
      node += l * l;
    }
    acc += node / static_cast<double>(shard.size());
  }
  return std::sqrt(acc / static_cast<double>(nodes()));
}

std::unique_ptr<LogisticSuite> logistic_suite(LogisticSpec spec) { return std::make_unique<LogisticSuite>(std::move(spec)); }

}  // namespace dopt
