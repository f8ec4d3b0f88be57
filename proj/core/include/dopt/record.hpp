#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dopt {

/// One logged iteration. `iter` t refers to the network-average iterate xbar^t;
/// counters are cumulative.
struct MetricRow {
  std::int64_t iter = 0;
  std::uint64_t samples = 0;
  std::int64_t comm_rounds = 0;
  double grad_norm_sq = 0.0;  // ||grad f(xbar^t)||^2
  double consensus_err = 0.0; // ||X^t - 1 xbar^t||_F
  double f_value = 0.0;       // f(xbar^t)
};

struct RunRecord {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::string fingerprint;
  std::vector<MetricRow> rows;
  std::int64_t output_iter = 0;             // index drawn uniformly from 0..T
  double output_grad_norm_sq = 0.0;         // ||grad f(xbar^{output_iter})||^2
  bool truncated = false;                   // stopped by the sample budget

  std::uint64_t total_samples() const { return rows.empty() ? 0 : rows.back().samples; }
};

inline constexpr const char* kCsvHeader = "iter,samples,comm_rounds,grad_norm_sq,consensus_err,f_value";

/// Writes `# key=value` metadata lines (fingerprint first), the header, then
/// one row per iteration. Reals use 17 significant digits; lines end in LF.
void write_csv(const RunRecord& record, std::ostream& out);

/// Parses what write_csv produced.
RunRecord read_csv(std::istream& in);

}  // namespace dopt
