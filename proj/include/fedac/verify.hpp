#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fedac/types.hpp"

namespace fedac {

enum class CheckStatus { pass, fail, skip };

const char *to_string(CheckStatus status) noexcept;

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::fail;
  std::string detail;
  /// Exact hex rendering of the numbers the check produced; two runs agree
  /// bitwise iff their fingerprints are equal.
  std::string fingerprint;
  double seconds = 0.0;

  bool passed() const noexcept { return status == CheckStatus::pass; }
};

/// Pinned tolerances of the verification suite.
namespace tolerance {
inline constexpr double equivalence_k_sweep = 1e-12;
inline constexpr double norm_bound = 1e-9;
inline constexpr double contraction = 1e-9;
inline constexpr double amplification = 1e-3;
inline constexpr double projector_map = 1e-8;
inline constexpr double gradient = 1e-6;
inline constexpr double baseline_spread = 2.0;
} // namespace tolerance

/// FedAvg(K=1) against minibatch SGD, noise-free FedAc across K, and the
/// accelerated minibatch baseline against single-worker FedAc.
CheckResult check_equivalences(int threads);
/// Random admissible (mu, L, gamma, eta) points against the uniform norm bounds.
CheckResult check_norm_bounds(Index points = 1000, Index h_samples = 21);
/// Noise-free single-step contraction of the decentralized potential.
CheckResult check_potential_contraction(Index problems = 50, Index steps = 100);
/// Amplification of an initial gap under AGD on the constructed objective.
CheckResult check_instability(std::vector<Index> Ks = {1, 2, 4, 8});
/// Central differences against grad() for every objective kind.
CheckResult check_gradients(Index points = 20);

/// Searches `dir` for a LibSVM file called `stem`, `stem.txt` or `stem.gz`.
std::filesystem::path find_dataset(const std::filesystem::path &dir, const std::string &stem);
/// Data directory from FEDAC_DATA_DIR, else ./data.
std::filesystem::path default_data_dir();

/// a9a is 32561 x 123; epsilon (when present) is 400000 x 2000.
CheckResult check_dataset_shapes(const std::filesystem::path &data_dir);
/// Desk-scale a9a sweep: ordering at K = M = 64 and agreement at K = 1.
CheckResult check_speedup_ordering(const std::filesystem::path &data_dir, int threads,
                                   const std::filesystem::path &cache_dir = {});

/// Criteria that need no external data, at the given thread count.
std::vector<CheckResult> run_core_checks(int threads);

} // namespace fedac
