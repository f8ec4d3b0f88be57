#include "dopt/hard_instance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/random/bernoulli_distribution.hpp>
#include <fmt/format.h>

#include "dopt/error.hpp"

namespace dopt::hard {

double psi(double t) {
  if (t <= 0.5) return 0.0;
  const double u = 2.0 * t - 1.0;
  return std::exp(1.0 - 1.0 / (u * u));
}

double psi_prime(double t) {
  if (t <= 0.5) return 0.0;
  const double u = 2.0 * t - 1.0;
  return psi(t) * 4.0 / (u * u * u);
}

double phi(double t) { return std::sqrt(std::numbers::pi / 2.0) * std::erfc(-t / std::numbers::sqrt2); }

double phi_prime(double t) { return std::exp(-0.5 * t * t); }

double chain_value(const ConstRef& x) {
  const Eigen::Index d = x.size();
  detail::require(d >= 1, "chain_value", "D must be >= 1");
  double v = -psi(1.0) * phi(x[0]);
  for (Eigen::Index i = 1; i < d; ++i) v += psi(-x[i - 1]) * phi(-x[i]) - psi(x[i - 1]) * phi(x[i]);
  return v;
}

Vector chain_grad(const ConstRef& x) {
  const Eigen::Index d = x.size();
  detail::require(d >= 1, "chain_grad", "D must be >= 1");
  Vector g(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    // Term containing x_j as the phi argument.
    double gj = j == 0 ? -psi(1.0) * phi_prime(x[0])
                       : -psi(-x[j - 1]) * phi_prime(-x[j]) - psi(x[j - 1]) * phi_prime(x[j]);
    // Term containing x_j as the psi argument.
    if (j + 1 < d) gj += -psi_prime(-x[j]) * phi(-x[j + 1]) - psi_prime(x[j]) * phi(x[j + 1]);
    g[j] = gj;
  }
  return g;
}

std::size_t prog0(const ConstRef& x) {
  for (Eigen::Index i = x.size(); i > 0; --i)
    if (x[i - 1] != 0.0) return static_cast<std::size_t>(i);
  return 0;
}

Vector chain_stochastic_grad(const ConstRef& x, double p, bool xi) {
  detail::require(p > 0.0 && p <= 1.0, "chain_sample", "p must be in (0, 1]");
  Vector g = chain_grad(x);
  const auto k = static_cast<Eigen::Index>(prog0(x));
  const double factor = xi ? 1.0 / p : 0.0;
  for (Eigen::Index j = k; j < g.size(); ++j) g[j] *= factor;
  return g;
}

Vector chain_sample(const ConstRef& x, double p, Rng& rng, bool* xi_out) {
  detail::require(p > 0.0 && p <= 1.0, "chain_sample", "p must be in (0, 1]");
  boost::random::bernoulli_distribution<double> coin(p);
  const bool xi = coin(rng);
  if (xi_out != nullptr) *xi_out = xi;
  return chain_stochastic_grad(x, p, xi);
}

// ------------------------------------------------------------ distributed

namespace {
std::size_t total_length(const std::vector<Block>& blocks) {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.length;
  return n;
}
}  // namespace

HardInstanceSuite::HardInstanceSuite(std::vector<Block> blocks, double smoothness, std::vector<double> sigmas)
    : OracleSuite(blocks.size(), std::max<std::size_t>(1, total_length(blocks))),
      blocks_(std::move(blocks)),
      smoothness_(smoothness),
      sigmas_(std::move(sigmas)),
      successes_(blocks_.size(), 0) {
  std::size_t expect = 0;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    if (b.offset != expect || b.length == 0)
      throw InvalidArgument(fmt::format("hard_instance: block {} is not contiguous or is empty", i));
    if (!(b.scale > 0.0) || !(b.p > 0.0 && b.p <= 1.0))
      throw InvalidArgument(fmt::format("hard_instance: block {} has invalid scale/p", i));
    expect += b.length;
  }
  detail::require(smoothness_ > 0.0, "hard_instance", "L must be positive");
  detail::require(sigmas_.size() == blocks_.size(), "hard_instance", "need one sigma per node");
}

double HardInstanceSuite::gradient_scale(std::size_t node) const {
  check_node(node);
  return static_cast<double>(nodes()) * smoothness_ * blocks_[node].scale / kEll1;
}

Vector HardInstanceSuite::chain_coordinates(std::size_t node, const Vector& x) const {
  check_node(node);
  const auto& b = blocks_[node];
  return x.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.length)) / b.scale;
}

std::size_t HardInstanceSuite::chain_progress(std::size_t node, const Vector& x) const {
  return prog0(chain_coordinates(node, x));
}

double HardInstanceSuite::local_value(std::size_t node, const Vector& x) const {
  const double lambda = blocks_.at(node).scale;
  return gradient_scale(node) * lambda * chain_value(chain_coordinates(node, x));
}

Vector HardInstanceSuite::local_grad(std::size_t node, const Vector& x) const {
  const auto& b = blocks_.at(node);
  Vector g = Vector::Zero(static_cast<Eigen::Index>(dim()));
  g.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.length)) =
      gradient_scale(node) * chain_grad(chain_coordinates(node, x));
  return g;
}

void HardInstanceSuite::draw(std::size_t node, std::span<const Vector> points, Rng& rng, std::span<Vector> out) {
  const auto& b = blocks_[node];
  boost::random::bernoulli_distribution<double> coin(b.p);
  const bool xi = coin(rng);
  if (xi) ++successes_[node];
  const double scale = gradient_scale(node);
  for (std::size_t k = 0; k < points.size(); ++k) {
    out[k] = Vector::Zero(static_cast<Eigen::Index>(dim()));
    out[k].segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.length)) =
        scale * chain_stochastic_grad(chain_coordinates(node, points[k]), b.p, xi);
  }
}

std::unique_ptr<HardInstanceSuite> distributed_hard_instance(const HardInstanceParams& params) {
  const std::size_t m = params.nodes;
  detail::require(m >= 1, "hard_instance", "need m >= 1");
  detail::require(params.smoothness > 0.0 && params.delta > 0.0 && params.eps > 0.0, "hard_instance",
                  "L, Delta and eps must be positive");
  if (params.sigmas.size() != m) throw InvalidArgument(fmt::format("hard_instance: {} sigmas for {} nodes", params.sigmas.size(), m));
  for (std::size_t i = 0; i < m; ++i)
    if (!(params.sigmas[i] > 0.0)) throw InvalidArgument(fmt::format("hard_instance: sigma[{}] must be > 0", i));
  std::vector<double> shares = params.shares.empty() ? std::vector<double>(m, 1.0 / static_cast<double>(m)) : params.shares;
  if (shares.size() != m) throw InvalidArgument("hard_instance: need one sample share per node");
  for (double c : shares) detail::require(c > 0.0, "hard_instance", "sample shares must be positive");
  const double share_sum = std::accumulate(shares.begin(), shares.end(), 0.0);
  if (std::abs(share_sum - 1.0) > 1e-9) throw InvalidArgument(fmt::format("hard_instance: sample shares sum to {}, not 1", share_sum));

  const double md = static_cast<double>(m);
  const double eps = params.eps, L = params.smoothness;
  const double sigma_am = std::accumulate(params.sigmas.begin(), params.sigmas.end(), 0.0) / md;
  std::vector<Block> blocks(m);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double s = params.sigmas[i];
    const double len = std::floor(params.delta * L / (4.0 * kDelta0 * kEll1 * eps * eps) * (sigma_am / s) * md * shares[i]);
    if (len < 1.0)
      throw InvalidArgument(fmt::format("hard_instance: node {} gets chain length D_i = {} < 1; decrease eps", i, len));
    auto& b = blocks[i];
    b.offset = offset;
    b.length = static_cast<std::size_t>(len);
    b.scale = kEll1 / (std::sqrt(md) * L) * std::sqrt(s / sigma_am) * 2.0 * eps;
    b.p = 1.0 / (s * sigma_am / (4.0 * md * kA * kA * eps * eps) + 1.0);
    offset += b.length;
  }
  return std::make_unique<HardInstanceSuite>(std::move(blocks), L, params.sigmas);
}

std::vector<ChainDemoReport> run_chain_demo(const HardInstanceParams& params, const ChainDemoOptions& options) {
  detail::require(options.trials >= 1, "lowerbound_demo", "need at least one trial");
  detail::require(options.budget_fraction >= 0.0 && options.budget_fraction < 1.0, "lowerbound_demo",
                  "budget fraction must be in [0, 1)");
  auto suite = distributed_hard_instance(params);
  const double step = kEll1 / (static_cast<double>(params.nodes) * params.smoothness);
  std::vector<ChainDemoReport> reports;
  for (std::size_t i = 0; i < suite->nodes(); ++i) {
    const auto& b = suite->blocks()[i];
    ChainDemoReport r;
    r.node = i;
    r.chain_length = b.length;
    r.p = b.p;
    r.threshold = (static_cast<double>(b.length) - 1.0) / (2.0 * b.p);
    r.draws = static_cast<std::uint64_t>(std::floor(options.budget_fraction * r.threshold));
    r.trials = options.trials;
    double progress_sum = 0.0;
    for (std::size_t trial = 0; trial < options.trials; ++trial) {
      Rng rng = node_stream(options.seed + trial * 0x632BE59BD9B4E019ULL, i);
      Vector x = Vector::Zero(static_cast<Eigen::Index>(suite->dim()));
      const std::uint64_t before = suite->successes(i);
      for (std::uint64_t k = 0; k < r.draws; ++k) {
        x -= step * suite->sample(i, x, rng);
        if (suite->chain_progress(i, x) > suite->successes(i) - before) r.zero_chain_held = false;
      }
      const std::size_t prog = suite->chain_progress(i, x);
      progress_sum += static_cast<double>(prog);
      r.max_progress = std::max(r.max_progress, prog);
      if (prog < b.length) ++r.below_end;
    }
    r.mean_progress = progress_sum / static_cast<double>(options.trials);
    reports.push_back(r);
  }
  return reports;
}

}  // namespace dopt::hard
