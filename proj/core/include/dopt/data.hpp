#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dopt/types.hpp"

namespace dopt::data {

/// Sorted (index, value) pairs with 0-based, strictly increasing indices.
struct SparseRow {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  double dot(const Vector& x) const;
  /// out += scale * row
  void axpy(double scale, Vector& out) const;
  double squared_norm() const;

  bool operator==(const SparseRow&) const = default;
};

struct SparseDataset {
  std::size_t dim = 0;
  std::vector<SparseRow> rows;
  std::vector<int> labels;  // each +1 or -1

  std::size_t size() const { return rows.size(); }
  /// Rows `ids` (in that order) as a new dataset of the same dimension.
  SparseDataset subset(const std::vector<std::size_t>& ids) const;

  bool operator==(const SparseDataset&) const = default;
};

/// Parse LIBSVM text: `label idx:val idx:val ...` per line with 1-based
/// indices. Labels +1/1 map to +1; -1 and 0 map to -1. Text after `#` is
/// ignored. The dimension is the largest index unless `dim_override` is given
/// (it must cover every index). Errors carry the 1-based line number.
SparseDataset parse_libsvm(std::istream& in, std::optional<std::size_t> dim_override = std::nullopt);

/// Read a LIBSVM file; names ending in `.gz` are decompressed with zlib.
SparseDataset read_libsvm_file(const std::string& path, std::optional<std::size_t> dim_override = std::nullopt);

/// Inverse of parse_libsvm (values written with 17 significant digits).
void write_libsvm(const SparseDataset& ds, std::ostream& out);

enum class PartitionScheme { uniform_shuffle, label_sorted };

PartitionScheme parse_partition_scheme(const std::string& name);
std::string to_string(PartitionScheme scheme);

struct PartitionPlan {
  PartitionScheme scheme = PartitionScheme::uniform_shuffle;
  std::vector<std::vector<std::size_t>> assignment;  // row ids per node
};

/// Split rows over m nodes in near-equal contiguous chunks after either a
/// seeded shuffle or a stable sort by label (+1 first). Requires 1 <= m <= n.
PartitionPlan partition(const SparseDataset& ds, std::size_t m, PartitionScheme scheme, std::uint64_t seed);

}  // namespace dopt::data
