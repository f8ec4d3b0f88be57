#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dopt/algorithms.hpp"
#include "dopt/allocation.hpp"

namespace dopt::schedules {

enum class BatchRule { optimal, qm, uniform };

BatchRule parse_batch_rule(const std::string& name);
std::string to_string(BatchRule rule);

inline constexpr std::int64_t kMaxIterations = 100'000'000;

// Every round count below is ceil(scale * (2 + sqrt 2) / (2 sqrt chi) * log(arg)),
// floored at zero. `scale` is the experiment's rounds_scale knob.
std::int64_t fastmix_rounds(double chi, double log_argument, double scale = 1.0);

/// R_t for D-NSS: log argument 14 max{9m^4, 70m^2, 6m^3}.
std::int64_t dnss_rounds(std::size_t m, double chi, double scale = 1.0);
/// R_0 for D-NSS: log argument 1 + 448 m L^2 eta^2 y0_sq_sum / (T eps^2).
std::int64_t dnss_initial_rounds(std::size_t m, double chi, double L, double eta, std::int64_t T, double eps,
                                     double y0_sq_sum, double scale = 1.0);
/// R_t for D-NSS-VR: log argument 1344 c m^2 with c = max{1/(bq), 1}.
std::int64_t vr_rounds(std::size_t m, double chi, std::int64_t b, double q, double scale = 1.0);
/// R_0 for D-NSS-VR: log argument 1 + 16 m y0_sq_sum / (T eps^2).
std::int64_t vr_initial_rounds(std::size_t m, double chi, std::int64_t T, double eps, double y0_sq_sum,
                                     double scale = 1.0);

/// eta = 1/(2L), T = ceil(32 Delta L / eps^2), batches from `rule` (optimal means the
/// 16x ceiling plan; qm and uniform are evaluated at eps/4 so all three share one
/// accuracy level). Without `y0_sq_sum` the returned config sizes R0 from the
/// first mini-batch through initial_rounds_rule.
algorithms::DnssConfig dnss_plan(double delta, double L, const allocation::NoiseProfile& profile, double eps,
                                       double chi, std::optional<double> y0_sq_sum = std::nullopt,
                                       double rounds_scale = 1.0, BatchRule rule = BatchRule::optimal);

/// eta = 1/(48 Lbar), T = ceil(384 Delta Lbar / eps^2 + 2/p) with B_i, b, p, q from
/// the variance-reduced schedule. Fails when T would exceed kMaxIterations.
algorithms::DnssVrConfig vr_plan(double delta, double Lbar, const allocation::NoiseProfile& profile,
                                         double eps, double chi, std::optional<double> y0_sq_sum = std::nullopt,
                                         double rounds_scale = 1.0,
                                         double batch_constant = allocation::kVrBatchConstant);

}  // namespace dopt::schedules
