#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dopt::topology {

enum class GraphKind { ring, path, complete, erdos_renyi };

GraphKind parse_graph_kind(const std::string& name);
std::string to_string(GraphKind kind);

struct TopologySpec {
  GraphKind kind = GraphKind::ring;
  std::size_t m = 1;
  double edge_prob = 0.0;  // erdos_renyi only
  std::uint64_t seed = 0;  // erdos_renyi only
};

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected simple graph on nodes 0..m-1. Edges are stored normalized
/// (first < second) and sorted.
class Graph {
 public:
  Graph() = default;
  /// Validates and normalizes `edges`; throws on self-loops, duplicates or
  /// out-of-range endpoints. Connectivity is not required here.
  Graph(std::size_t m, std::vector<Edge> edges);

  std::size_t nodes() const { return m_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::vector<std::size_t> degrees() const;
  bool has_edge(std::size_t i, std::size_t j) const;
  bool connected() const;

 private:
  std::size_t m_ = 0;
  std::vector<Edge> edges_;
};

/// Erdos-Renyi resample budget used by build_graph.
inline constexpr int kErdosRenyiRetries = 1000;

/// Build a connected graph. Erdos-Renyi draws are resampled until connected
/// (at most kErdosRenyiRetries times); the same seed always yields the same graph.
Graph build_graph(const TopologySpec& spec);

/// Coupled Erdos-Renyi: one uniform per node pair from `seed`, edge iff u < p.
/// Increasing p only adds edges. The result may be disconnected.
Graph coupled_erdos_renyi(std::size_t m, double p, std::uint64_t seed);

struct SpectralGap {
  double lambda2 = 0.0;
  double chi = 0.0;
};

/// Symmetric doubly stochastic gossip matrix with its spectrum summary.
struct MixingMatrix {
  Eigen::MatrixXd W;
  double lambda2 = 0.0;
  double chi = 0.0;

  std::size_t nodes() const { return static_cast<std::size_t>(W.rows()); }
};

enum class Weighting { metropolis, lazy_metropolis };

Weighting parse_weighting(const std::string& name);
std::string to_string(Weighting weighting);

/// Metropolis-Hastings weights: W_ij = 1/(1 + max(deg_i, deg_j)) on edges,
/// diagonal completes each row to 1. `lazy_metropolis` returns (I + W)/2,
/// which additionally guarantees W is positive semidefinite.
MixingMatrix metropolis_weights(const Graph& g, Weighting weighting = Weighting::metropolis);

/// All eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
/// Throws if `a` is not symmetric to 1e-12.
std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& a);

/// Second-largest eigenvalue (with multiplicity) and chi = 1 - lambda2.
SpectralGap spectral_gap(const Eigen::MatrixXd& w);

enum class MixingViolation {
  not_square,
  not_symmetric,
  negative_entry,
  row_sums,
  column_sums,
  not_psd,             // an eigenvalue below 0
  exceeds_identity,    // an eigenvalue above 1
  eigenvalue_one_not_simple,
};

std::string describe(MixingViolation v);

/// Checks every clause of the mixing-matrix assumption; empty result = valid.
std::vector<MixingViolation> validate_mixing(const Eigen::MatrixXd& w);

struct CalibrationOptions {
  int max_bisections = 60;
  int restarts = 20;
  Weighting weighting = Weighting::metropolis;
};

/// Find a connected coupled-Erdos-Renyi graph whose mixing matrix has
/// |chi - target_chi| <= tol, by bisection over the edge probability.
/// Throws with the closest chi reached when the budget runs out.
Graph calibrate_random_graph(std::size_t m, double target_chi, double tol, std::uint64_t seed,
                             const CalibrationOptions& options = {});

}  // namespace dopt::topology
