// dopt-sim: command-line front end for the decentralized simulator.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dopt/allocation.hpp"
#include "dopt/config.hpp"
#include "dopt/consensus.hpp"
#include "dopt/error.hpp"
#include "dopt/experiment.hpp"
#include "dopt/hard_instance.hpp"
#include "dopt/schedules.hpp"

namespace fs = std::filesystem;
using namespace dopt;

namespace {

struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
auto in_stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    // Pipeline errors already carry their stage.
    if (msg.rfind("stage '", 0) == 0) throw StageError(msg);
    throw StageError(fmt::format("stage '{}': {}", name, msg));
  }
}

config::ExperimentConfig load_config(const std::string& path) {
  return in_stage("config", [&] { return config::load(path); });
}

void write_text(const fs::path& path, const std::string& text) {
  in_stage("output", [&] {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
    return 0;
  });
}

// Runs every seed of `cfg` and writes per-seed CSVs plus one aggregate file.
void run_and_write(const config::ExperimentConfig& cfg, const fs::path& out_dir, const std::string& aggregate_name) {
  const auto records = in_stage("run", [&] { return experiment::run_seeds(cfg); });
  for (const auto& r : records) {
    std::ostringstream csv;
    write_csv(r, csv);
    write_text(out_dir / fmt::format("{}-seed{}.csv", r.algorithm, r.seed), csv.str());
    std::cout << fmt::format("{} seed {}: {} iterations, {} samples, {} rounds, sampled-output |grad|^2 = {:.6g}{}\n",
                             r.algorithm, r.seed, r.rows.back().iter, r.total_samples(), r.rows.back().comm_rounds,
                             r.output_grad_norm_sq, r.truncated ? " (stopped by sample budget)" : "");
  }
  const auto agg = in_stage("aggregate", [&] { return experiment::aggregate(records); });
  std::ostringstream csv;
  experiment::write_aggregate_csv(agg, csv);
  write_text(out_dir / aggregate_name, csv.str());
  std::cout << "wrote " << (out_dir / aggregate_name).string() << "\n";
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

allocation::NoiseProfile allocation_profile(const config::ExperimentConfig& cfg) {
  if (!cfg.sigmas.estimate_pilot) return {cfg.sigmas.resolve(cfg.topology.spec.m)};
  auto problem = in_stage("oracles", [&] { return experiment::build_problem(cfg); });
  return in_stage("estimation", [&] {
    return allocation::estimate_sigmas(*problem.suite, problem.x0, *cfg.sigmas.estimate_pilot, cfg.seeds.front());
  });
}

int cmd_allocate(const std::string& path) {
  const auto cfg = load_config(path);
  const auto profile = allocation_profile(cfg);
  const auto [opt, thm, uni, qm] = in_stage("allocation", [&] {
    return std::tuple{allocation::optimal_batches(profile, cfg.eps), allocation::proportional_batches(profile, cfg.eps),
                      allocation::uniform_batches(profile, cfg.eps), allocation::qm_batches(profile, cfg.eps)};
  });
  std::cout << "node,sigma,B_optimal,B_proportional,B_uniform,B_qm\n";
  for (std::size_t i = 0; i < profile.nodes(); ++i)
    std::cout << fmt::format("{},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g}\n", i, profile.sigmas[i], opt.batches[i],
                             thm.batches[i], uni.batches[i], qm.batches[i]);
  std::cout << fmt::format("total,,{:.12g},{:.12g},{:.12g},{:.12g}\n", opt.total, thm.total, uni.total, qm.total);
  return 0;
}

int cmd_mixinfo(const std::string& path) {
  const auto cfg = load_config(path);
  const auto net = experiment::build_network(cfg);
  const auto m = net.graph.nodes();
  const auto& mix = net.mixing;
  std::cout << fmt::format("m = {}\n", m);
  std::cout << fmt::format("edges = {}\n", net.graph.edges().size());
  std::cout << fmt::format("lambda2 = {:.12g}\n", mix.lambda2);
  std::cout << fmt::format("chi = {:.12g}\n", mix.chi);
  std::cout << fmt::format("fastmix_momentum = {:.12g}\n", consensus::fastmix_momentum(mix.lambda2));
  if (mix.chi <= 0.0) return 0;
  const double scale = cfg.algorithm.rounds_scale;
  std::cout << fmt::format("Rt_dnss = {}\n", schedules::dnss_rounds(m, mix.chi, scale));
  const auto vr = in_stage("allocation", [&] {
    return allocation::vr_schedule({cfg.sigmas.resolve(m)}, cfg.eps, cfg.algorithm.batch_constant);
  });
  std::cout << fmt::format("Rt_dnss_vr = {}\n", schedules::vr_rounds(m, mix.chi, vr.mini_batch, vr.q, scale));
  std::cout << fmt::format("Rt_dsgt = 1\n");
  std::cout << fmt::format("violations = {}\n", topology::validate_mixing(mix.W).size());
  for (auto v : topology::validate_mixing(mix.W)) std::cout << "  " << topology::describe(v) << "\n";
  return 0;
}

struct DemoArgs {
  std::size_t m = 1;
  double eps = 0.05;
  std::string sigmas = "1";
  double smoothness = 1.0;
  double delta = 1.0;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  double fraction = 0.99;
};

int cmd_lowerbound(const DemoArgs& a) {
  hard::HardInstanceParams params;
  params.nodes = a.m;
  params.eps = a.eps;
  params.smoothness = a.smoothness;
  params.delta = a.delta;
  for (const auto& s : split_list(a.sigmas)) params.sigmas.push_back(std::stod(s));
  if (params.sigmas.size() == 1 && a.m > 1) params.sigmas.assign(a.m, params.sigmas.front());
  hard::ChainDemoOptions opt;
  opt.trials = a.trials;
  opt.seed = a.seed;
  opt.budget_fraction = a.fraction;
  const auto reports = in_stage("hard_instance", [&] { return hard::run_chain_demo(params, opt); });
  std::cout << "node,D,p,threshold,draws,mean_prog,max_prog,below_end,trials,zero_chain_held\n";
  bool ok = true;
  for (const auto& r : reports) {
    std::cout << fmt::format("{},{},{:.12g},{:.12g},{},{:.6g},{},{},{},{}\n", r.node, r.chain_length, r.p,
                             r.threshold, r.draws, r.mean_progress, r.max_progress, r.below_end, r.trials,
                             r.zero_chain_held ? "yes" : "no");
    ok = ok && r.zero_chain_held;
  }
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized node-specific-sampling simulator"};
  app.require_subcommand(1);

  std::string config_path, out_override, algos = "dnss,gt_sa,dsgt";

  auto* run = app.add_subcommand("run", "Run every seed of a config and aggregate");
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_override, "Output directory (default: the config's output)");

  auto* sweep = app.add_subcommand("sweep", "Run several algorithms under their theorem schedules");
  sweep->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--algos", algos, "Comma-separated list of dnss, dnss_vr, gt_sa, uniform, dsgt");
  sweep->add_option("--out", out_override, "Output directory (default: the config's output)");

  auto* alloc = app.add_subcommand("allocate", "Print the allocation table");
  alloc->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  auto* mix = app.add_subcommand("mixinfo", "Print mixing-matrix spectrum and round counts");
  mix->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  DemoArgs demo;
  auto* lb = app.add_subcommand("lowerbound-demo", "Zero-chain progress versus the sample threshold");
  lb->add_option("--m", demo.m, "Number of nodes")->check(CLI::PositiveNumber);
  lb->add_option("--eps", demo.eps, "Target accuracy")->check(CLI::PositiveNumber);
  lb->add_option("--sigmas", demo.sigmas, "Comma-separated sigma_i (one value is broadcast)");
  lb->add_option("--L", demo.smoothness, "Smoothness")->check(CLI::PositiveNumber);
  lb->add_option("--delta", demo.delta, "Initial suboptimality")->check(CLI::PositiveNumber);
  lb->add_option("--trials", demo.trials, "Trials per node");
  lb->add_option("--seed", demo.seed, "Seed");
  lb->add_option("--fraction", demo.fraction, "Draws as a fraction of (D-1)/(2p)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = load_config(config_path);
      const fs::path out = out_override.empty() ? fs::path(cfg.output) : fs::path(out_override);
      run_and_write(cfg, out, "aggregate.csv");
    } else if (*sweep) {
      const auto cfg = load_config(config_path);
      const fs::path out = out_override.empty() ? fs::path(cfg.output) : fs::path(out_override);
      for (const auto& name : split_list(algos)) {
        const auto variant = in_stage("config", [&] { return config::with_algorithm(cfg, name); });
        run_and_write(variant, out, fmt::format("aggregate-{}.csv", name));
      }
    } else if (*alloc) {
      return cmd_allocate(config_path);
    } else if (*mix) {
      return cmd_mixinfo(config_path);
    } else if (*lb) {
      return cmd_lowerbound(demo);
    }
  } catch (const std::exception& e) {
    std::cerr << "dopt-sim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
