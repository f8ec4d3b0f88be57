#include "dopt/schedules.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dopt/error.hpp"

namespace dopt::schedules {
namespace {

constexpr const char* kWhere = "schedule";

std::int64_t checked_iterations(double t) {
  if (!std::isfinite(t) || t > static_cast<double>(kMaxIterations))
    throw InvalidArgument(fmt::format("schedule: T = {:.6g} exceeds the cap of {} iterations", t, kMaxIterations));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(t)));
}

void check_positive(double v, const char* name) {
  detail::require(std::isfinite(v) && v > 0.0, kWhere, fmt::format("{} must be positive (got {})", name, v));
}

std::vector<std::int64_t> batches_for(const allocation::NoiseProfile& profile, double eps, BatchRule rule) {
  switch (rule) {
    case BatchRule::optimal:
      return allocation::proportional_batches(profile, eps).counts();
    case BatchRule::qm:
      return allocation::qm_batches(profile, eps / 4.0).counts();
    case BatchRule::uniform:
      return allocation::uniform_batches(profile, eps / 4.0).counts();
  }
  detail::fail(kWhere, "unknown batch rule");
}

}  // namespace

BatchRule parse_batch_rule(const std::string& name) {
  if (name == "optimal") return BatchRule::optimal;
  if (name == "qm") return BatchRule::qm;
  if (name == "uniform") return BatchRule::uniform;
  throw InvalidArgument("schedule: unknown batch rule '" + name + "' (expected optimal, qm or uniform)");
}

std::string to_string(BatchRule rule) {
  switch (rule) {
    case BatchRule::optimal: return "optimal";
    case BatchRule::qm: return "qm";
    case BatchRule::uniform: return "uniform";
  }
  return "?";
}

std::int64_t fastmix_rounds(double chi, double log_argument, double scale) {
  detail::require(chi > 0.0 && chi <= 1.0, kWhere, fmt::format("chi must lie in (0, 1], got {}", chi));
  detail::require(log_argument > 0.0, kWhere, "log argument must be positive");
  detail::require(scale >= 0.0, kWhere, "rounds_scale must be nonnegative");
  const double r = scale * (2.0 + std::sqrt(2.0)) / (2.0 * std::sqrt(chi)) * std::log(log_argument);
  return r <= 0.0 ? 0 : static_cast<std::int64_t>(std::ceil(r));
}

std::int64_t dnss_rounds(std::size_t m, double chi, double scale) {
  const double md = static_cast<double>(m);
  const double worst = std::max({9.0 * std::pow(md, 4), 70.0 * md * md, 6.0 * std::pow(md, 3)});
  return fastmix_rounds(chi, 14.0 * worst, scale);
}

std::int64_t dnss_initial_rounds(std::size_t m, double chi, double L, double eta, std::int64_t T, double eps,
                                     double y0_sq_sum, double scale) {
  const double arg = 1.0 + 448.0 * static_cast<double>(m) * L * L * eta * eta * y0_sq_sum /
                               (static_cast<double>(T) * eps * eps);
  return fastmix_rounds(chi, arg, scale);
}

std::int64_t vr_rounds(std::size_t m, double chi, std::int64_t b, double q, double scale) {
  const double c = std::max(1.0 / (static_cast<double>(b) * q), 1.0);
  const double md = static_cast<double>(m);
  return fastmix_rounds(chi, 1344.0 * c * md * md, scale);
}

std::int64_t vr_initial_rounds(std::size_t m, double chi, std::int64_t T, double eps, double y0_sq_sum,
                                     double scale) {
  const double arg = 1.0 + 16.0 * static_cast<double>(m) * y0_sq_sum / (static_cast<double>(T) * eps * eps);
  return fastmix_rounds(chi, arg, scale);
}

algorithms::DnssConfig dnss_plan(double delta, double L, const allocation::NoiseProfile& profile, double eps,
                                       double chi, std::optional<double> y0_sq_sum, double rounds_scale,
                                       BatchRule rule) {
  check_positive(delta, "Delta");
  check_positive(L, "L");
  check_positive(eps, "eps");
  detail::require(chi > 0.0, kWhere, fmt::format("chi must be positive, got {}", chi));
  const auto m = profile.nodes();

  algorithms::DnssConfig cfg;
  cfg.eta = 1.0 / (2.0 * L);
  cfg.iterations = checked_iterations(32.0 * delta * L / (eps * eps));
  cfg.batches = batches_for(profile, eps, rule);
  cfg.rounds = dnss_rounds(m, chi, rounds_scale);
  if (y0_sq_sum) {
    cfg.initial_rounds = dnss_initial_rounds(m, chi, L, cfg.eta, cfg.iterations, eps, *y0_sq_sum, rounds_scale);
  } else {
    const double eta = cfg.eta;
    const auto T = cfg.iterations;
    cfg.initial_rounds_rule = [=](double y0) {
      return dnss_initial_rounds(m, chi, L, eta, T, eps, y0, rounds_scale);
    };
  }
  return cfg;
}

algorithms::DnssVrConfig vr_plan(double delta, double Lbar, const allocation::NoiseProfile& profile,
                                         double eps, double chi, std::optional<double> y0_sq_sum, double rounds_scale,
                                         double batch_constant) {
  check_positive(delta, "Delta");
  check_positive(Lbar, "Lbar");
  check_positive(eps, "eps");
  detail::require(chi > 0.0, kWhere, fmt::format("chi must be positive, got {}", chi));
  const auto m = profile.nodes();
  const auto vr = allocation::vr_schedule(profile, eps, batch_constant);

  algorithms::DnssVrConfig cfg;
  cfg.eta = 1.0 / (48.0 * Lbar);
  cfg.big_batches = vr.big_batches;
  cfg.mini_batch = vr.mini_batch;
  cfg.p = vr.p;
  cfg.q = vr.q;
  cfg.iterations = checked_iterations(384.0 * delta * Lbar / (eps * eps) + 2.0 / vr.p);
  cfg.rounds = vr_rounds(m, chi, vr.mini_batch, vr.q, rounds_scale);
  if (y0_sq_sum) {
    cfg.initial_rounds = vr_initial_rounds(m, chi, cfg.iterations, eps, *y0_sq_sum, rounds_scale);
  } else {
    const auto T = cfg.iterations;
    cfg.initial_rounds_rule = [=](double y0) { return vr_initial_rounds(m, chi, T, eps, y0, rounds_scale); };
  }
  return cfg;
}

}  // namespace dopt::schedules
