#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedac/algorithms.hpp"
#include "fedac/objective.hpp"

namespace fedac {

enum class Algorithm { fedac1, fedac2, fedac_vanilla, fedavg, mb_sgd, mb_acsgd };

const char *to_string(Algorithm algorithm) noexcept;
Algorithm parse_algorithm(std::string_view name);

/// Learning-rate grid used for tuning unless overridden.
std::vector<double> default_eta_grid();

struct ExperimentConfig {
  // Objective: "logistic" (LibSVM file), "synthetic_logistic" or "quadratic".
  std::string objective = "logistic";
  std::filesystem::path data;
  std::optional<Index> dim;
  double lambda = 1e-3;

  Index synth_n = 2000;
  Index synth_dim = 50;
  Index synth_nnz = 10;
  std::uint64_t synth_seed = 1;

  Index quad_dim = 10;
  double quad_mu = 0.01;
  double quad_L = 1.0;
  double quad_sigma = 1.0;

  std::vector<Algorithm> algorithms{Algorithm::fedac1};
  Index T = 1024;
  std::vector<Index> K{1};
  std::vector<Index> M{1};
  std::vector<double> eta = default_eta_grid();
  std::vector<std::uint64_t> seeds{1, 2, 3};
  Index eval_every = 128;
  double optimum_tol = 1e-12;
  int threads = 1;
  std::filesystem::path out_dir = "out";

  /// Throws Error(usage) unless every K divides T, eval_every divides T and
  /// the grids are nonempty with positive entries.
  void validate() const;
};

/// Reads flat `key = value` lines (`#` comments, lists comma-separated) over
/// the defaults. Unknown keys are rejected.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path &path);
/// Applies one key/value pair; shared by the file reader and CLI overrides.
void apply_config_value(ExperimentConfig &cfg, std::string_view key,
                        std::string_view value);
std::vector<std::string> config_keys();

struct Optimum {
  Vector w_star;
  double f_star = 0.0;
  Index iterations = 0;
  double grad_norm = 0.0;
};

/// Deterministic AGD with exact gradients until ||grad F|| <= tol * (1 + |F|)
/// or `max_iterations`; throws Error(numerical) with the achieved gradient
/// norm when the cap is hit. Requires mu_est > 0.
Optimum compute_optimum(const Objective &obj, double tol = 1e-12,
                        Index max_iterations = 1'000'000,
                        const Vector &start = Vector());

/// Objective built from a config, plus its optimum. Logistic optima are cached
/// in `cache_dir` (when nonempty) keyed by dataset hash and lambda.
struct Problem {
  std::shared_ptr<const Objective> objective;
  Optimum optimum;
};
Problem build_problem(const ExperimentConfig &cfg,
                      const std::filesystem::path &cache_dir = {});

struct CellSpec {
  Algorithm algorithm = Algorithm::fedac1;
  Index M = 1;
  Index K = 1;
  double eta = 0.0;
  std::uint64_t seed = 0;
};

struct CellResult {
  CellSpec spec;
  std::vector<EvalRecord> records; // t = 0, eval_every, ..., T
  /// Best over the records, plus FedAvg's weighted average at t = T.
  double best_suboptimality = 0.0;
  bool diverged = false;
};

/// One (algorithm, M, K, eta, seed) run with records T/eval_every + 1 long.
/// Divergence and invalid hyperparameters yield +inf from that point on.
CellResult run_experiment(const Problem &problem, const ExperimentConfig &cfg,
                          const CellSpec &cell, int threads = 1);

struct SweepRow {
  Algorithm algorithm = Algorithm::fedac1;
  Index M = 1;
  Index K = 1;
  double best_eta = 0.0;
  double best_suboptimality = 0.0;
  Index seeds = 0; // bookkeeping only; not part of the CSV/JSON schema
  bool all_diverged = false;

  /// Compares the serialized fields.
  friend bool operator==(const SweepRow &, const SweepRow &);
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<CellResult> cells;
};

/// For every (algorithm, M, K): median over seeds of the best-over-time
/// suboptimality, minimized over eta (ties go to the smaller eta). A group in
/// which every cell diverged is flagged with the smallest eta and +inf.
SweepResult tune_and_sweep(const Problem &problem, const ExperimentConfig &cfg);

/// Median with +inf propagating; averages the middle pair for even sizes.
double median(std::vector<double> values);

// Output schemas -----------------------------------------------------------

struct RecordRow {
  Algorithm algorithm = Algorithm::fedac1;
  Index M = 1;
  Index K = 1;
  double eta = 0.0;
  std::uint64_t seed = 0;
  Index t = 0;
  double suboptimality = 0.0;

  friend bool operator==(const RecordRow &, const RecordRow &) = default;
};

std::vector<RecordRow> flatten_records(std::span<const CellResult> cells);

std::string records_csv(std::span<const RecordRow> rows);
std::string sweep_csv(std::span<const SweepRow> rows);
std::string records_json(std::span<const RecordRow> rows);
std::string sweep_json(std::span<const SweepRow> rows);

std::vector<RecordRow> parse_records_csv(std::string_view text);
std::vector<SweepRow> parse_sweep_csv(std::string_view text);
std::vector<RecordRow> parse_records_json(std::string_view text);
std::vector<SweepRow> parse_sweep_json(std::string_view text);

/// Writes text to a file, creating parent directories; Error(data) names the
/// path and cause on failure.
void write_text(const std::filesystem::path &path, std::string_view text);

void write_csv(std::span<const RecordRow> rows, const std::filesystem::path &path);
void write_csv(std::span<const SweepRow> rows, const std::filesystem::path &path);
void write_json(std::span<const RecordRow> rows, const std::filesystem::path &path);
void write_json(std::span<const SweepRow> rows, const std::filesystem::path &path);

/// Shortest round-trip decimal form ("inf" / "-inf" / "nan" for non-finite).
std::string format_double(double value);
double parse_double(std::string_view text);

} // namespace fedac
