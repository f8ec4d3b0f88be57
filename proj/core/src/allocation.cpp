#include "dopt/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "dopt/error.hpp"
#include "dopt/oracles.hpp"
#include "dopt/rng.hpp"

namespace dopt::allocation {

namespace {

void check_eps(double eps, const char* where) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument(fmt::format("{}: eps must be positive, got {}", where, eps));
}

void check_profile(const NoiseProfile& profile, const char* where) {
  if (profile.sigmas.empty()) throw InvalidArgument(fmt::format("{}: empty noise profile", where));
  for (std::size_t i = 0; i < profile.sigmas.size(); ++i)
    if (!(profile.sigmas[i] >= 0.0) || !std::isfinite(profile.sigmas[i]))
      throw InvalidArgument(fmt::format("{}: sigma[{}] = {} is not a finite non-negative number", where, i, profile.sigmas[i]));
}

double sum_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

AllocationPlan finish(const NoiseProfile& profile, std::vector<double> batches) {
  AllocationPlan plan;
  plan.total = sum_of(batches);
  plan.mse_bound = mse_bound(profile, batches);
  plan.batches = std::move(batches);
  return plan;
}

double ceil_at_least_one(double x) { return std::max(1.0, std::ceil(x)); }

}  // namespace

std::vector<std::int64_t> AllocationPlan::counts() const {
  std::vector<std::int64_t> out;
  out.reserve(batches.size());
  for (double b : batches) {
    if (!(b >= 1.0) || b != std::floor(b)) throw InvalidArgument(fmt::format("allocation: batch {} is not a positive integer", b));
    out.push_back(static_cast<std::int64_t>(b));
  }
  return out;
}

std::int64_t VrSchedule::total_big() const { return std::accumulate(big_batches.begin(), big_batches.end(), std::int64_t{0}); }

double mse_bound(const NoiseProfile& profile, const std::vector<double>& batches) {
  if (batches.size() != profile.sigmas.size())
    throw InvalidArgument(fmt::format("mse_bound: {} batches for {} nodes", batches.size(), profile.sigmas.size()));
  const double m = static_cast<double>(batches.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < batches.size(); ++i) {
    if (!(batches[i] > 0.0)) throw InvalidArgument(fmt::format("mse_bound: batch[{}] = {} must be positive", i, batches[i]));
    acc += profile.sigmas[i] * profile.sigmas[i] / batches[i];
  }
  return acc / (m * m);
}

AllocationPlan optimal_batches(const NoiseProfile& profile, double eps) {
  check_profile(profile, "optimal_batches");
  check_eps(eps, "optimal_batches");
  for (std::size_t i = 0; i < profile.sigmas.size(); ++i)
    if (!(profile.sigmas[i] > 0.0))
      throw InvalidArgument(fmt::format("optimal_batches: sigma[{}] = {} must be strictly positive", i, profile.sigmas[i]));
  const double m = static_cast<double>(profile.nodes());
  const double total_sigma = sum_of(profile.sigmas);
  const double denom = m * m * eps * eps;
  std::vector<double> b(profile.nodes());
  std::transform(profile.sigmas.begin(), profile.sigmas.end(), b.begin(), [&](double s) { return s * total_sigma / denom; });
  return finish(profile, std::move(b));
}

AllocationPlan proportional_batches(const NoiseProfile& profile, double eps) {
  check_profile(profile, "proportional_batches");
  check_eps(eps, "proportional_batches");
  const double m = static_cast<double>(profile.nodes());
  const double total_sigma = sum_of(profile.sigmas);
  std::vector<double> b(profile.nodes());
  std::transform(profile.sigmas.begin(), profile.sigmas.end(), b.begin(),
                 [&](double s) { return ceil_at_least_one(16.0 * s * total_sigma / (m * m * eps * eps)); });
  return finish(profile, std::move(b));
}

AllocationPlan uniform_batches(const NoiseProfile& profile, double eps) {
  check_profile(profile, "uniform_batches");
  check_eps(eps, "uniform_batches");
  const double m = static_cast<double>(profile.nodes());
  const double smax = *std::max_element(profile.sigmas.begin(), profile.sigmas.end());
  return finish(profile, std::vector<double>(profile.nodes(), ceil_at_least_one(smax * smax / (m * eps * eps))));
}

AllocationPlan qm_batches(const NoiseProfile& profile, double eps) {
  check_profile(profile, "qm_batches");
  check_eps(eps, "qm_batches");
  const double m = static_cast<double>(profile.nodes());
  const double qm = mean_stats(profile).qm;
  return finish(profile, std::vector<double>(profile.nodes(), ceil_at_least_one(qm * qm / (m * eps * eps))));
}

VrSchedule vr_schedule(const NoiseProfile& profile, double eps, double constant) {
  check_profile(profile, "vr_schedule");
  check_eps(eps, "vr_schedule");
  detail::require(constant > 0.0, "vr_schedule", "batch constant must be positive");
  const double m = static_cast<double>(profile.nodes());
  const double total_sigma = sum_of(profile.sigmas);
  VrSchedule s;
  s.big_batches.reserve(profile.nodes());
  for (double sigma : profile.sigmas)
    s.big_batches.push_back(static_cast<std::int64_t>(ceil_at_least_one(constant * sigma * total_sigma / (m * m * eps * eps))));
  const double big = static_cast<double>(s.total_big());
  const double root = std::sqrt(big);
  s.mini_batch = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(root / m)));
  const double b = static_cast<double>(s.mini_batch);
  s.q = std::min(1.0, root / (b * m));
  s.p = b * s.q / (b * s.q + big / m);
  return s;
}

MeanStats mean_stats(const NoiseProfile& profile) {
  check_profile(profile, "mean_stats");
  const double m = static_cast<double>(profile.nodes());
  MeanStats st;
  double sq = 0.0, p23 = 0.0;
  for (double s : profile.sigmas) {
    st.am += s;
    sq += s * s;
    p23 += std::cbrt(s * s);
  }
  st.am /= m;
  st.qm = std::sqrt(sq / m);
  st.p23 = std::pow(p23 / m, 1.5);
  return st;
}

NoiseProfile estimate_sigmas(OracleSuite& suite, const Vector& x0, std::int64_t n_pilot, std::uint64_t seed) {
  if (n_pilot < 2) throw InvalidArgument(fmt::format("estimate_sigmas: n_pilot = {} must be >= 2", n_pilot));
  const std::uint64_t pilot_seed = mix_seed(seed ^ 0xA0761D6478BD642FULL);
  NoiseProfile profile;
  profile.sigmas.reserve(suite.nodes());
  std::vector<Vector> draws(static_cast<std::size_t>(n_pilot));
  for (std::size_t i = 0; i < suite.nodes(); ++i) {
    Rng rng = node_stream(pilot_seed, i);
    Vector mean = Vector::Zero(x0.size());
    for (auto& g : draws) {
      g = suite.sample(i, x0, rng);
      mean += g;
    }
    mean /= static_cast<double>(n_pilot);
    double ss = 0.0;
    for (const auto& g : draws) ss += (g - mean).squaredNorm();
    profile.sigmas.push_back(std::sqrt(ss / static_cast<double>(n_pilot - 1)));
  }
  return profile;
}

}  // namespace dopt::allocation
