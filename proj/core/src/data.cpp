#include "dopt/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <boost/random/uniform_int_distribution.hpp>
#include <fmt/format.h>
#include <zlib.h>

#include "dopt/error.hpp"
#include "dopt/rng.hpp"

namespace dopt::data {

double SparseRow::dot(const Vector& x) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < index.size(); ++k) acc += value[k] * x[static_cast<Eigen::Index>(index[k])];
  return acc;
}

void SparseRow::axpy(double scale, Vector& out) const {
  for (std::size_t k = 0; k < index.size(); ++k) out[static_cast<Eigen::Index>(index[k])] += scale * value[k];
}

double SparseRow::squared_norm() const {
  double acc = 0.0;
  for (double v : value) acc += v * v;
  return acc;
}

SparseDataset SparseDataset::subset(const std::vector<std::size_t>& ids) const {
  SparseDataset out;
  out.dim = dim;
  out.rows.reserve(ids.size());
  out.labels.reserve(ids.size());
  for (auto id : ids) {
    out.rows.push_back(rows.at(id));
    out.labels.push_back(labels.at(id));
  }
  return out;
}

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw ParseError(fmt::format("libsvm: line {}: {}", line, what));
}

int parse_label(std::string_view tok, std::size_t line) {
  double v = 0.0;
  std::string buf(tok);
  if (!buf.empty() && buf.front() == '+') buf.erase(0, 1);
  auto [ptr, ec] = std::from_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc() || ptr != buf.data() + buf.size()) parse_fail(line, fmt::format("unparsable label '{}'", tok));
  if (v == 1.0) return 1;
  if (v == -1.0 || v == 0.0) return -1;
  parse_fail(line, fmt::format("label '{}' is not one of +1, 1, -1, 0", tok));
}

}  // namespace

SparseDataset parse_libsvm(std::istream& in, std::optional<std::size_t> dim_override) {
  SparseDataset ds;
  std::size_t max_index = 0;
  bool any_feature = false;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (auto hash = text.find('#'); hash != std::string::npos) text.resize(hash);
    if (!text.empty() && text.back() == '\r') text.pop_back();
    std::istringstream tokens(text);
    std::string tok;
    if (!(tokens >> tok)) continue;  // blank line
    const int label = parse_label(tok, line_no);
    SparseRow row;
    std::int64_t last = -1;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        parse_fail(line_no, fmt::format("malformed feature token '{}'", tok));
      std::uint64_t idx = 0;
      auto [p1, e1] = std::from_chars(tok.data(), tok.data() + colon, idx);
      if (e1 != std::errc() || p1 != tok.data() + colon) parse_fail(line_no, fmt::format("bad feature index in '{}'", tok));
      if (idx == 0) parse_fail(line_no, "feature indices are 1-based; got 0");
      double val = 0.0;
      auto [p2, e2] = std::from_chars(tok.data() + colon + 1, tok.data() + tok.size(), val);
      if (e2 != std::errc() || p2 != tok.data() + tok.size() || !std::isfinite(val))
        parse_fail(line_no, fmt::format("bad feature value in '{}'", tok));
      const auto zero_based = static_cast<std::int64_t>(idx - 1);
      if (zero_based <= last) parse_fail(line_no, fmt::format("feature index {} is not increasing", idx));
      last = zero_based;
      row.index.push_back(static_cast<std::uint32_t>(zero_based));
      row.value.push_back(val);
      max_index = std::max<std::size_t>(max_index, static_cast<std::size_t>(zero_based));
      any_feature = true;
    }
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(label);
  }
  const std::size_t inferred = any_feature ? max_index + 1 : 0;
  if (dim_override) {
    if (*dim_override < inferred)
      throw ParseError(fmt::format("libsvm: dimension override {} is smaller than the largest index {}", *dim_override, inferred));
    ds.dim = *dim_override;
  } else {
    ds.dim = inferred;
  }
  return ds;
}

SparseDataset read_libsvm_file(const std::string& path, std::optional<std::size_t> dim_override) {
  const bool gz = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
  if (!gz) {
    std::ifstream f(path);
    if (!f) throw Error("libsvm: cannot open '" + path + "'");
    return parse_libsvm(f, dim_override);
  }
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw Error("libsvm: cannot open '" + path + "'");
  std::string content;
  char buf[1 << 16];
  int n = 0;
  while ((n = gzread(file, buf, sizeof buf)) > 0) content.append(buf, static_cast<std::size_t>(n));
  const bool failed = n < 0;
  gzclose(file);
  if (failed) throw Error("libsvm: gzip read error in '" + path + "'");
  std::istringstream in(content);
  return parse_libsvm(in, dim_override);
}

void write_libsvm(const SparseDataset& ds, std::ostream& out) {
  for (std::size_t r = 0; r < ds.size(); ++r) {
    out << (ds.labels[r] > 0 ? "+1" : "-1");
    const auto& row = ds.rows[r];
    for (std::size_t k = 0; k < row.index.size(); ++k) out << fmt::format(" {}:{:.17g}", row.index[k] + 1, row.value[k]);
    out << '\n';
  }
}

PartitionScheme parse_partition_scheme(const std::string& name) {
  if (name == "uniform_shuffle") return PartitionScheme::uniform_shuffle;
  if (name == "label_sorted") return PartitionScheme::label_sorted;
  throw InvalidArgument("partition: unknown scheme '" + name + "'");
}

std::string to_string(PartitionScheme scheme) {
  return scheme == PartitionScheme::uniform_shuffle ? "uniform_shuffle" : "label_sorted";
}

PartitionPlan partition(const SparseDataset& ds, std::size_t m, PartitionScheme scheme, std::uint64_t seed) {
  const std::size_t n = ds.size();
  detail::require(m >= 1, "partition", "m must be >= 1");
  if (m > n) throw InvalidArgument(fmt::format("partition: {} nodes but only {} rows", m, n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (scheme == PartitionScheme::uniform_shuffle) {
    // Fisher-Yates with boost's portable integer distribution.
    Rng rng(mix_seed(seed));
    for (std::size_t i = n; i > 1; --i) {
      boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
  } else {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ds.labels[a] > ds.labels[b]; });
  }
  PartitionPlan plan;
  plan.scheme = scheme;
  plan.assignment.resize(m);
  const std::size_t base = n / m, extra = n % m;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    plan.assignment[i].assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                              order.begin() + static_cast<std::ptrdiff_t>(cursor + len));
    cursor += len;
  }
  return plan;
}

}  // namespace dopt::data
