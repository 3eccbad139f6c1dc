#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "fedac/types.hpp"

namespace fedac {

/// Binary-labelled sparse samples. Row i of `features` holds sample i with
/// strictly increasing 0-based column indices; `labels[i]` is +1 or -1.
struct Dataset {
  SparseRowMatrix features;
  Vector labels;

  Index n() const noexcept { return labels.size(); }
  Index dim() const noexcept { return features.cols(); }
};

struct DatasetStats {
  Index n = 0;
  Index dim = 0;
  double max_row_norm_sq = 0.0;
  double mean_row_norm_sq = 0.0;
};

/// Parses LibSVM text (`<label> <idx>:<val> ...` per line, 1-based indices,
/// `#` starts a comment, blank lines skipped). When `declared_dim` is absent the
/// dimension is the largest index seen. Throws Error(data) naming the line.
Dataset parse_libsvm(std::string_view text,
                     std::optional<Index> declared_dim = std::nullopt);

/// Reads a file (gzip-decompressed when the name ends in `.gz`) and parses it.
Dataset load_libsvm(const std::filesystem::path &path,
                    std::optional<Index> declared_dim = std::nullopt);

/// Canonical LibSVM text: label, then `i+1:value` with shortest round-trip
/// float formatting, one sample per line.
std::string serialize_libsvm(const Dataset &ds);

DatasetStats dataset_stats(const Dataset &ds);

/// FNV-1a over the canonical serialization; stable across platforms.
std::uint64_t dataset_hash(const Dataset &ds);

/// Random sparse dataset with 0/1 features and labels from a planted linear
/// model. Deterministic in `seed`. Used where the LibSVM files are unavailable.
Dataset make_synthetic_binary(Index n, Index dim, Index nnz_per_row,
                              std::uint64_t seed);

} // namespace fedac
