#include "dopt/consensus.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "dopt/error.hpp"

namespace dopt::consensus {

double ContractionParams::rho(std::int64_t rounds, double chi) {
  return c1 * std::pow(1.0 - c2 * std::sqrt(chi), static_cast<double>(rounds));
}

double fastmix_momentum(double lambda2) {
  const double l2 = std::clamp(lambda2, 0.0, 1.0);
  const double root = std::sqrt(1.0 - l2 * l2);
  return (1.0 - root) / (1.0 + root);
}

Mixer::Mixer(const topology::MixingMatrix& w) : w_(w.W), eta_(fastmix_momentum(w.lambda2)) {
  detail::require(w_.rows() == w_.cols() && w_.rows() > 0, "fastmix", "mixing matrix must be square and non-empty");
}

void Mixer::mix(NodeMatrix& z, std::int64_t rounds) {
  if (z.rows() != w_.rows())
    throw InvalidArgument(fmt::format("fastmix: input has {} rows, mixing matrix is {}x{}", z.rows(), w_.rows(), w_.cols()));
  detail::require(rounds >= 0, "fastmix", "round count must be >= 0");
  rounds_ += rounds;
  if (rounds == 0) return;
  prev_ = z;  // z^{-1} = z^0
  next_.resize(z.rows(), z.cols());
  for (std::int64_t r = 0; r < rounds; ++r) {
    next_.noalias() = w_ * z;
    next_ *= (1.0 + eta_);
    next_ -= eta_ * prev_;
    prev_.swap(z);
    z.swap(next_);
  }
}

NodeMatrix fastmix(const NodeMatrix& z0, const topology::MixingMatrix& w, std::int64_t rounds) {
  Mixer mixer(w);
  NodeMatrix z = z0;
  mixer.mix(z, rounds);
  return z;
}

double consensus_error(const NodeMatrix& z) {
  if (z.rows() == 0) return 0.0;
  const Eigen::RowVectorXd mean = z.colwise().mean();
  return (z.rowwise() - mean).norm();
}

std::int64_t rounds_for_target(double chi, double target_rho) {
  if (!(chi > 0.0 && chi <= 1.0)) throw InvalidArgument(fmt::format("rounds_for_target: chi = {} not in (0, 1]", chi));
  detail::require(target_rho > 0.0, "rounds_for_target", "target_rho must be > 0");
  if (target_rho >= ContractionParams::c1) return 0;
  const double base = 1.0 - ContractionParams::c2 * std::sqrt(chi);
  auto r = static_cast<std::int64_t>(std::ceil(std::log(target_rho / ContractionParams::c1) / std::log(base)));
  r = std::max<std::int64_t>(r, 0);
  // Guard the ceiling against rounding in log().
  while (ContractionParams::rho(r, chi) > target_rho) ++r;
  while (r > 0 && ContractionParams::rho(r - 1, chi) <= target_rho) --r;
  return r;
}

}  // namespace dopt::consensus
