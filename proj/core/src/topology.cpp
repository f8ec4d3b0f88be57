#include "dopt/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <fmt/format.h>

#include "dopt/error.hpp"
#include "dopt/rng.hpp"

namespace dopt::topology {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kStochasticTol = 1e-12;
constexpr double kSpectrumTol = 1e-10;

bool is_symmetric(const Eigen::MatrixXd& a, double tol) {
  if (a.rows() != a.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

}  // namespace

GraphKind parse_graph_kind(const std::string& name) {
  if (name == "ring") return GraphKind::ring;
  if (name == "path") return GraphKind::path;
  if (name == "complete") return GraphKind::complete;
  if (name == "erdos_renyi") return GraphKind::erdos_renyi;
  throw InvalidArgument("topology: unknown graph kind '" + name + "'");
}

std::string to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::ring: return "ring";
    case GraphKind::path: return "path";
    case GraphKind::complete: return "complete";
    case GraphKind::erdos_renyi: return "erdos_renyi";
  }
  return "?";
}

Weighting parse_weighting(const std::string& name) {
  if (name == "metropolis") return Weighting::metropolis;
  if (name == "lazy_metropolis") return Weighting::lazy_metropolis;
  throw InvalidArgument("topology: unknown weighting '" + name + "'");
}

std::string to_string(Weighting weighting) {
  return weighting == Weighting::metropolis ? "metropolis" : "lazy_metropolis";
}

Graph::Graph(std::size_t m, std::vector<Edge> edges) : m_(m) {
  detail::require(m >= 1, "topology", "graph needs at least one node");
  for (auto& [i, j] : edges) {
    if (i >= m || j >= m)
      throw InvalidArgument(fmt::format("topology: edge ({}, {}) out of range for m = {}", i, j, m));
    if (i == j) throw InvalidArgument(fmt::format("topology: self-loop at node {}", i));
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw InvalidArgument("topology: duplicate edge");
  edges_ = std::move(edges);
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> deg(m_, 0);
  for (const auto& [i, j] : edges_) {
    ++deg[i];
    ++deg[j];
  }
  return deg;
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
}

bool Graph::connected() const {
  if (m_ == 0) return false;
  std::vector<std::size_t> parent(m_);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = m_;
  for (const auto& [i, j] : edges_) {
    auto a = find(i), b = find(j);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

Graph coupled_erdos_renyi(std::size_t m, double p, std::uint64_t seed) {
  Rng rng(mix_seed(seed));
  boost::random::uniform_01<double> unif;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (unif(rng) < p) edges.emplace_back(i, j);
  return Graph(m, std::move(edges));
}

Graph build_graph(const TopologySpec& spec) {
  const std::size_t m = spec.m;
  detail::require(m >= 1, "topology", "m must be >= 1");
  std::vector<Edge> edges;
  switch (spec.kind) {
    case GraphKind::ring:
      if (m == 2) {
        edges.emplace_back(0, 1);
      } else if (m > 2) {
        for (std::size_t i = 0; i < m; ++i) edges.emplace_back(i, (i + 1) % m);
      }
      return Graph(m, std::move(edges));
    case GraphKind::path:
      for (std::size_t i = 0; i + 1 < m; ++i) edges.emplace_back(i, i + 1);
      return Graph(m, std::move(edges));
    case GraphKind::complete:
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) edges.emplace_back(i, j);
      return Graph(m, std::move(edges));
    case GraphKind::erdos_renyi: {
      if (!(spec.edge_prob > 0.0 && spec.edge_prob <= 1.0))
        throw InvalidArgument(fmt::format("topology: erdos_renyi edge_prob {} not in (0, 1]", spec.edge_prob));
      Rng rng(mix_seed(spec.seed));
      boost::random::bernoulli_distribution<double> coin(spec.edge_prob);
      for (int attempt = 0; attempt < kErdosRenyiRetries; ++attempt) {
        edges.clear();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = i + 1; j < m; ++j)
            if (coin(rng)) edges.emplace_back(i, j);
        Graph g(m, edges);
        if (g.connected()) return g;
      }
      throw Error(fmt::format("topology: erdos_renyi(m={}, p={}, seed={}) still disconnected after {} resamples",
                              m, spec.edge_prob, spec.seed, kErdosRenyiRetries));
    }
  }
  throw InvalidArgument("topology: unhandled graph kind");
}

MixingMatrix metropolis_weights(const Graph& g, Weighting weighting) {
  const std::size_t m = g.nodes();
  const auto deg = g.degrees();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (const auto& [i, j] : g.edges()) {
    const double wij = 1.0 / (1.0 + static_cast<double>(std::max(deg[i], deg[j])));
    w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = wij;
    w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = wij;
  }
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      if (j != i) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  if (weighting == Weighting::lazy_metropolis) {
    w *= 0.5;
    w.diagonal().array() += 0.5;
  }
  const auto gap = spectral_gap(w);
  return MixingMatrix{std::move(w), gap.lambda2, gap.chi};
}

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& input) {
  if (!is_symmetric(input, kSymmetryTol)) throw InvalidArgument("spectral: matrix is not symmetric");
  const Eigen::Index n = input.rows();
  Eigen::MatrixXd a = input;
  const double scale = std::max(a.norm(), 1e-300);
  const int max_sweeps = 100 * static_cast<int>(std::max<Eigen::Index>(n, 1));
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * scale) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

SpectralGap spectral_gap(const Eigen::MatrixXd& w) {
  const auto ev = symmetric_eigenvalues(w);
  // A 1x1 matrix has no second eigenvalue; a single node is trivially in consensus.
  const double lambda2 = ev.size() >= 2 ? ev[ev.size() - 2] : 0.0;
  return SpectralGap{lambda2, 1.0 - lambda2};
}

std::string describe(MixingViolation v) {
  switch (v) {
    case MixingViolation::not_square: return "W is not square";
    case MixingViolation::not_symmetric: return "W is not symmetric";
    case MixingViolation::negative_entry: return "W has a negative entry";
    case MixingViolation::row_sums: return "W 1 != 1 (row sums)";
    case MixingViolation::column_sums: return "1^T W != 1^T (column sums)";
    case MixingViolation::not_psd: return "0 <= W violated (negative eigenvalue)";
    case MixingViolation::exceeds_identity: return "W <= I violated (eigenvalue above 1)";
    case MixingViolation::eigenvalue_one_not_simple: return "null space of I - W is larger than span(1)";
  }
  return "?";
}

std::vector<MixingViolation> validate_mixing(const Eigen::MatrixXd& w) {
  std::vector<MixingViolation> out;
  if (w.rows() != w.cols()) return {MixingViolation::not_square};
  const bool symmetric = is_symmetric(w, kSymmetryTol);
  if (!symmetric) out.push_back(MixingViolation::not_symmetric);
  if ((w.array() < 0.0).any()) out.push_back(MixingViolation::negative_entry);
  if (((w.rowwise().sum().array() - 1.0).abs() > kStochasticTol).any()) out.push_back(MixingViolation::row_sums);
  if (((w.colwise().sum().array() - 1.0).abs() > kStochasticTol).any()) out.push_back(MixingViolation::column_sums);
  if (!symmetric) return out;  // spectral clauses need a real spectrum
  const auto ev = symmetric_eigenvalues(w);
  if (ev.front() < -kSpectrumTol) out.push_back(MixingViolation::not_psd);
  if (ev.back() > 1.0 + kSpectrumTol) out.push_back(MixingViolation::exceeds_identity);
  const auto near_one = std::count_if(ev.begin(), ev.end(), [](double x) { return std::abs(x - 1.0) <= kSpectrumTol; });
  if (near_one != 1) out.push_back(MixingViolation::eigenvalue_one_not_simple);
  return out;
}

Graph calibrate_random_graph(std::size_t m, double target_chi, double tol, std::uint64_t seed,
                             const CalibrationOptions& options) {
  detail::require(m >= 2, "calibrate_random_graph", "need m >= 2");
  detail::require(target_chi > 0.0 && target_chi <= 1.0, "calibrate_random_graph", "target_chi must be in (0, 1]");
  detail::require(tol >= 0.0, "calibrate_random_graph", "tol must be >= 0");

  double best_err = std::numeric_limits<double>::infinity();
  double best_chi = 0.0;
  auto chi_of = [&](const Graph& g) {
    if (!g.connected()) return 0.0;
    return metropolis_weights(g, options.weighting).chi;
  };
  auto consider = [&](const Graph& g) {
    const double chi = chi_of(g);
    if (g.connected() && std::abs(chi - target_chi) < best_err) {
      best_err = std::abs(chi - target_chi);
      best_chi = chi;
    }
    return chi;
  };

  for (int restart = 0; restart < options.restarts; ++restart) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(restart) * 0x9E3779B97F4A7C15ULL;
    // chi is (roughly) nondecreasing along the coupled family.
    Graph top = coupled_erdos_renyi(m, 1.0, s);
    if (double chi = consider(top); std::abs(chi - target_chi) <= tol) return top;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < options.max_bisections; ++it) {
      const double mid = 0.5 * (lo + hi);
      Graph g = coupled_erdos_renyi(m, mid, s);
      const double chi = consider(g);
      if (g.connected() && std::abs(chi - target_chi) <= tol) return g;
      if (chi < target_chi) lo = mid; else hi = mid;
    }
  }
  throw Error(fmt::format("calibrate_random_graph: no graph with chi within {} of {} (m = {}); closest chi = {}",
                          tol, target_chi, m, best_chi));
}

}  // namespace dopt::topology
