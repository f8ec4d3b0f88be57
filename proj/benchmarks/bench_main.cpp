#include <random>

#include <benchmark/benchmark.h>

#include "dopt/algorithms.hpp"
#include "dopt/consensus.hpp"
#include "dopt/oracles.hpp"
#include "dopt/topology.hpp"

namespace {

dopt::topology::MixingMatrix er_mixing(std::size_t m) {
  return dopt::topology::metropolis_weights(dopt::topology::build_graph({dopt::topology::GraphKind::erdos_renyi, m, 0.3, 1}));
}

void BM_FastMix(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto d = state.range(1);
  const auto w = er_mixing(m);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n;
  dopt::NodeMatrix z(static_cast<Eigen::Index>(m), d);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = n(gen);
  for (auto _ : state) benchmark::DoNotOptimize(dopt::consensus::fastmix(z, w, 10));
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_FastMix)->Args({20, 123})->Args({20, 784})->Args({100, 123});

void BM_SpectralGap(benchmark::State& state) {
  const auto g = dopt::topology::build_graph({dopt::topology::GraphKind::erdos_renyi, static_cast<std::size_t>(state.range(0)), 0.3, 2});
  for (auto _ : state) benchmark::DoNotOptimize(dopt::topology::metropolis_weights(g).chi);
}
BENCHMARK(BM_SpectralGap)->Arg(20)->Arg(100)->Arg(300);

void BM_DnssIteration(benchmark::State& state) {
  const std::size_t m = 20;
  dopt::RandomQuadraticOptions opt;
  opt.nodes = m;
  opt.dim = static_cast<std::size_t>(state.range(0));
  opt.sigmas.assign(m, 1.0);
  auto suite = dopt::quadratic_suite(dopt::random_quadratic(opt));
  const auto w = er_mixing(m);
  dopt::algorithms::DnssConfig cfg;
  cfg.eta = 0.1;
  cfg.batches.assign(m, 8);
  cfg.iterations = 10;
  cfg.initial_rounds = 5;
  cfg.rounds = 5;
  for (auto _ : state) benchmark::DoNotOptimize(dopt::algorithms::dnss_run(*suite, w, cfg, {}).rows.size());
  state.SetItemsProcessed(state.iterations() * cfg.iterations);
}
BENCHMARK(BM_DnssIteration)->Arg(10)->Arg(100);

}  // namespace
BENCHMARK_MAIN();
