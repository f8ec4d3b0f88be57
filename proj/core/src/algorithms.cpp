#include "dopt/algorithms.hpp"

#include <algorithm>
#include <numeric>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "dopt/error.hpp"

namespace dopt::algorithms {
namespace {

using consensus::Mixer;

// Shared gradient-tracking loop. Callers fill Y (the new estimates) through a
// callback; the engine handles the tracker, the x update, both FastMix calls,
// logging and the sample budget.
class TrackingEngine {
 public:
  TrackingEngine(OracleSuite& suite, const topology::MixingMatrix& w, double eta, const RunOptions& options,
                 std::string default_name)
      : suite_(suite), mixer_(w), eta_(eta), options_(options) {
    const auto m = suite.nodes();
    const auto d = suite.dim();
    detail::require(static_cast<std::size_t>(w.W.rows()) == m, "algorithms",
                    "mixing matrix has " + std::to_string(w.W.rows()) + " rows but the problem has " +
                        std::to_string(m) + " nodes");
    detail::require(options.x0.size() == 0 || static_cast<std::size_t>(options.x0.size()) == d, "algorithms",
                    "x0 has dimension " + std::to_string(options.x0.size()) + ", expected " + std::to_string(d));

    st_.X = NodeMatrix::Zero(m, d);
    if (options.x0.size() != 0) st_.X.rowwise() = options.x0.transpose();
    st_.X_prev = st_.X;
    st_.Y = NodeMatrix::Zero(m, d);
    st_.Y_prev = st_.Y;
    st_.S = st_.Y;

    rngs_.reserve(m);
    for (std::size_t i = 0; i < m; ++i) rngs_.push_back(node_stream(options.seed, i));

    record_.algorithm = options.name.empty() ? std::move(default_name) : options.name;
    record_.seed = options.seed;
    log_row(0);
  }

  RunState& state() { return st_; }
  Rng& node_rng(std::size_t i) { return rngs_[i]; }
  OracleSuite& suite() { return suite_; }

  bool fits(std::uint64_t worst_case_cost) const {
    const auto used = suite_.total_samples();
    return used <= options_.max_samples && worst_case_cost <= options_.max_samples - used;
  }

  void mark_truncated() { record_.truncated = true; }

  // Runs one iteration: Y <- fill(), then the tracking and x updates.
  // `rounds_for` receives sum_i ||y_i||^2 after the fill so that the first
  // iteration can size R0 from the fresh estimates.
  template <class Fill, class Rounds>
  void step(Fill&& fill, Rounds&& rounds_for) {
    st_.Y_prev = st_.Y;
    fill(st_);
    const std::int64_t rounds = rounds_for(st_.Y.squaredNorm());
    detail::require(rounds >= 0, "algorithms", "negative communication round count");

    st_.S += st_.Y - st_.Y_prev;
    mixer_.mix(st_.S, rounds);
    st_.X_prev = st_.X;
    st_.X -= eta_ * st_.S;
    mixer_.mix(st_.X, rounds);

    ++st_.t;
    st_.samples = suite_.total_samples();
    st_.comm_rounds = mixer_.rounds_used();
    log_row(st_.t + 1);
    if (options_.observer) options_.observer(st_);
  }

  RunRecord finish() {
    auto out = output_stream(options_.seed);
    const auto last = record_.rows.back().iter;
    boost::random::uniform_int_distribution<std::int64_t> pick(0, last);
    record_.output_iter = pick(out);
    record_.output_grad_norm_sq = record_.rows[static_cast<std::size_t>(record_.output_iter)].grad_norm_sq;
    return std::move(record_);
  }

 private:
  void log_row(std::int64_t iter) {
    const Vector xbar = row_mean(st_.X);
    MetricRow row;
    row.iter = iter;
    row.samples = suite_.total_samples();
    row.comm_rounds = mixer_.rounds_used();
    row.grad_norm_sq = suite_.global_grad(xbar).squaredNorm();
    row.consensus_err = consensus::consensus_error(st_.X);
    row.f_value = suite_.global_value(xbar);
    record_.rows.push_back(row);
  }

  OracleSuite& suite_;
  Mixer mixer_;
  double eta_;
  const RunOptions& options_;
  RunState st_;
  std::vector<Rng> rngs_;
  RunRecord record_;
};

void fill_minibatch(TrackingEngine& engine, const std::vector<std::int64_t>& batches, RunState& st) {
  auto& suite = engine.suite();
  for (std::size_t i = 0; i < suite.nodes(); ++i) {
    const Vector xi = st.X.row(static_cast<Eigen::Index>(i)).transpose();
    st.Y.row(static_cast<Eigen::Index>(i)) = suite.minibatch_mean(i, xi, batches[i], engine.node_rng(i)).transpose();
  }
}

std::uint64_t sum_of(const std::vector<std::int64_t>& v) {
  return static_cast<std::uint64_t>(std::accumulate(v.begin(), v.end(), std::int64_t{0}));
}

void check_common(const char* who, double eta, std::size_t batches, std::size_t nodes, std::int64_t iterations,
                  std::int64_t r0, std::int64_t rt) {
  detail::require(eta > 0.0, who, "step size must be positive");
  detail::require(batches == nodes, who,
                  "got " + std::to_string(batches) + " batch sizes for " + std::to_string(nodes) + " nodes");
  detail::require(iterations >= 1, who, "need at least one iteration");
  detail::require(r0 >= 0 && rt >= 0, who, "round counts must be nonnegative");
}

void check_batches(const char* who, const std::vector<std::int64_t>& batches) {
  for (auto b : batches) detail::require(b >= 1, who, "batch sizes must be at least 1");
}

}  // namespace

RunRecord dnss_run(OracleSuite& suite, const topology::MixingMatrix& w, const DnssConfig& cfg,
                   const RunOptions& options) {
  check_common("dnss", cfg.eta, cfg.batches.size(), suite.nodes(), cfg.iterations, cfg.initial_rounds, cfg.rounds);
  check_batches("dnss", cfg.batches);

  TrackingEngine engine(suite, w, cfg.eta, options, "dnss");
  const auto cost = sum_of(cfg.batches);
  for (std::int64_t t = 0; t < cfg.iterations; ++t) {
    if (!engine.fits(cost)) {
      engine.mark_truncated();
      break;
    }
    engine.step([&](RunState& st) { fill_minibatch(engine, cfg.batches, st); },
                [&](double y_sq) -> std::int64_t {
                  if (t > 0) return cfg.rounds;
                  return cfg.initial_rounds_rule ? cfg.initial_rounds_rule(y_sq) : cfg.initial_rounds;
                });
  }
  return engine.finish();
}

RunRecord gt_sa_run(OracleSuite& suite, const topology::MixingMatrix& w, const DnssConfig& cfg,
                    const RunOptions& options) {
  RunOptions named = options;
  if (named.name.empty()) named.name = "gt_sa";
  return dnss_run(suite, w, cfg, named);
}

RunRecord dsgt_run(OracleSuite& suite, const topology::MixingMatrix& w, double eta, std::int64_t batch,
                   std::int64_t iterations, const RunOptions& options) {
  DnssConfig cfg;
  cfg.eta = eta;
  cfg.batches.assign(suite.nodes(), batch);
  cfg.iterations = iterations;
  cfg.initial_rounds = 1;
  cfg.rounds = 1;
  RunOptions named = options;
  if (named.name.empty()) named.name = "dsgt";
  return dnss_run(suite, w, cfg, named);
}

Vector recursive_estimate(OracleSuite& suite, std::size_t node, const Vector& x, const Vector& x_prev,
                          const Vector& y_prev, std::int64_t mini_batch, double q, Rng& rng) {
  boost::random::bernoulli_distribution<double> coin(q);
  if (!coin(rng)) return y_prev;

  const Vector points[2] = {x, x_prev};
  Vector g[2];
  Vector diff = Vector::Zero(x.size());
  for (std::int64_t j = 0; j < mini_batch; ++j) {
    suite.sample_shared(node, points, rng, g);
    diff += g[0] - g[1];
  }
  return y_prev + diff / (static_cast<double>(mini_batch) * q);
}

RunRecord dnss_vr_run(OracleSuite& suite, const topology::MixingMatrix& w, const DnssVrConfig& cfg,
                      const RunOptions& options) {
  check_common("dnss_vr", cfg.eta, cfg.big_batches.size(), suite.nodes(), cfg.iterations, cfg.initial_rounds,
               cfg.rounds);
  check_batches("dnss_vr", cfg.big_batches);
  detail::require(cfg.mini_batch >= 1, "dnss_vr", "mini-batch size must be at least 1");
  detail::require(cfg.p > 0.0 && cfg.p <= 1.0, "dnss_vr", "p must lie in (0, 1]");
  detail::require(cfg.q > 0.0 && cfg.q <= 1.0, "dnss_vr", "q must lie in (0, 1]");

  TrackingEngine engine(suite, w, cfg.eta, options, "dnss_vr");
  auto global = global_stream(options.seed);
  boost::random::bernoulli_distribution<double> zeta(cfg.p);

  const auto big_cost = sum_of(cfg.big_batches);
  const auto small_cost = 2 * static_cast<std::uint64_t>(cfg.mini_batch) * suite.nodes();

  for (std::int64_t t = 0; t < cfg.iterations; ++t) {
    const bool big = t == 0 || zeta(global);
    if (!engine.fits(big ? big_cost : small_cost)) {
      engine.mark_truncated();
      break;
    }
    engine.step(
        [&](RunState& st) {
          if (big) {
            fill_minibatch(engine, cfg.big_batches, st);
            return;
          }
          for (std::size_t i = 0; i < suite.nodes(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            const Vector x = st.X.row(r).transpose();
            const Vector x_prev = st.X_prev.row(r).transpose();
            const Vector y_prev = st.Y_prev.row(r).transpose();
            st.Y.row(r) =
                recursive_estimate(suite, i, x, x_prev, y_prev, cfg.mini_batch, cfg.q, engine.node_rng(i)).transpose();
          }
        },
        [&](double y_sq) -> std::int64_t {
          if (t > 0) return cfg.rounds;
          return cfg.initial_rounds_rule ? cfg.initial_rounds_rule(y_sq) : cfg.initial_rounds;
        });
  }
  return engine.finish();
}

}  // namespace dopt::algorithms
