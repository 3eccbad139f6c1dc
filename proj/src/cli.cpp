#include "fedac/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "fedac/dataset.hpp"
#include "fedac/diagnostics.hpp"
#include "fedac/error.hpp"
#include "fedac/harness.hpp"
#include "fedac/instability.hpp"
#include "fedac/verify.hpp"

namespace fedac {

namespace {

struct Common {
  int threads = 1;
  bool deterministic = false;
};

struct RunArgs {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  std::optional<std::string> algorithm;
  std::optional<Index> M, K, T, eval_every;
  std::optional<double> eta;
  std::optional<std::uint64_t> seed;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class Stopwatch {
public:
  explicit Stopwatch(const Common &common) : common_(common) {}
  void report(std::ostream &out) const {
    if (common_.deterministic)
      return;
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    out << "elapsed: " << num(s) << " s\n";
  }

private:
  const Common &common_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void add_common(CLI::App &sub, Common &common) {
  sub.add_option("--threads", common.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  sub.add_flag("--deterministic-output", common.deterministic, "Suppress timing lines");
}

ExperimentConfig resolve_config(const RunArgs &a, int threads, bool threads_given) {
  ExperimentConfig cfg = a.config.empty() ? ExperimentConfig{} : load_config(a.config);
  for (const auto &kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::usage, "--set expects key=value, got '" + kv + "'");
    apply_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.algorithm) cfg.algorithms = {parse_algorithm(*a.algorithm)};
  if (a.M) cfg.M = {*a.M};
  if (a.K) cfg.K = {*a.K};
  if (a.T) cfg.T = *a.T;
  if (a.eval_every) cfg.eval_every = *a.eval_every;
  if (a.eta) cfg.eta = {*a.eta};
  if (a.seed) cfg.seeds = {*a.seed};
  if (threads_given) cfg.threads = threads;
  if (!a.out.empty())
    cfg.out_dir = a.out;
  else if (const char *env = std::getenv("FEDAC_OUT_DIR"); env != nullptr && *env != '\0')
    cfg.out_dir = env;
  cfg.validate();
  return cfg;
}

void add_run_options(CLI::App &sub, RunArgs &a) {
  sub.add_option("--config", a.config, "Config file of key = value lines");
  sub.add_option("--out", a.out, "Output directory (overrides FEDAC_OUT_DIR and out_dir)");
  sub.add_option("--set", a.overrides, "Override a config key: --set key=value");
}

int cmd_check_data(const std::string &path, std::optional<Index> dim, std::ostream &out) {
  const DatasetStats s = dataset_stats(load_libsvm(path, dim));
  out << "n=" << s.n << " dim=" << s.dim << " max_row_norm_sq=" << num(s.max_row_norm_sq)
      << " mean_row_norm_sq=" << num(s.mean_row_norm_sq) << "\n";
  return 0;
}

int cmd_run(const RunArgs &a, const Common &common, bool threads_given, std::ostream &out) {
  const Stopwatch clock(common);
  const ExperimentConfig cfg = resolve_config(a, common.threads, threads_given);
  const Problem problem = build_problem(cfg, cfg.out_dir);
  const CellSpec cell{cfg.algorithms.front(), cfg.M.front(), cfg.K.front(), cfg.eta.front(),
                      cfg.seeds.front()};
  const CellResult result = run_experiment(problem, cfg, cell, cfg.threads);

  out << "algorithm=" << to_string(cell.algorithm) << " M=" << cell.M << " K=" << cell.K
      << " eta=" << format_double(cell.eta) << " seed=" << cell.seed
      << " f_star=" << format_double(problem.optimum.f_star) << "\n";
  out << std::setw(10) << "t" << "  suboptimality\n";
  for (const auto &r : result.records)
    out << std::setw(10) << r.t << "  " << format_double(r.suboptimality) << "\n";
  out << "best=" << format_double(result.best_suboptimality)
      << (result.diverged ? " (diverged)" : "") << "\n";

  const auto rows = flatten_records(std::span(&result, 1));
  write_csv(rows, cfg.out_dir / "records.csv");
  write_json(rows, cfg.out_dir / "records.json");
  clock.report(out);
  return 0;
}

int cmd_sweep(const RunArgs &a, const Common &common, bool threads_given, std::ostream &out) {
  const Stopwatch clock(common);
  const ExperimentConfig cfg = resolve_config(a, common.threads, threads_given);
  const Problem problem = build_problem(cfg, cfg.out_dir);
  const SweepResult sweep = tune_and_sweep(problem, cfg);

  out << "f_star=" << format_double(problem.optimum.f_star) << "\n";
  out << std::left << std::setw(14) << "algorithm" << std::right << std::setw(6) << "M"
      << std::setw(6) << "K" << std::setw(10) << "best_eta" << "  best_suboptimality\n";
  for (const auto &row : sweep.rows)
    out << std::left << std::setw(14) << to_string(row.algorithm) << std::right << std::setw(6)
        << row.M << std::setw(6) << row.K << std::setw(10) << format_double(row.best_eta) << "  "
        << format_double(row.best_suboptimality) << (row.all_diverged ? " (all diverged)" : "")
        << "\n";

  write_csv(sweep.rows, cfg.out_dir / "sweep.csv");
  write_json(sweep.rows, cfg.out_dir / "sweep.json");
  const auto records = flatten_records(sweep.cells);
  write_csv(records, cfg.out_dir / "records.csv");
  write_json(records, cfg.out_dir / "records.json");
  clock.report(out);
  return 0;
}

int cmd_instability(double kappa, Index K, double eps, const Common &common, std::ostream &out) {
  const Stopwatch clock(common);
  if (!(kappa >= 25))
    throw std::invalid_argument("--kappa must be at least 25");
  const InstabilityObjective setup = construct_instability_objective(kappa, 1.0, K);
  const InstabilityResult res = instability_experiment(setup, eps, K);
  out << "kappa=" << num(kappa) << " K=" << K << " eps=" << num(eps)
      << " delta=" << num(setup.delta) << " predicted_ratio=" << num(res.amplification) << "\n";
  out << std::setw(6) << "block" << std::setw(14) << "ratio" << std::setw(14) << "residual"
      << std::setw(14) << "|gap_w|" << std::setw(14) << "|gap_ag|" << "\n";
  for (std::size_t k = 0; k < res.ratios.size(); ++k)
    out << std::setw(6) << k + 1 << std::setw(14) << num(res.ratios[k]) << std::setw(14)
        << num(res.projector_residuals[k]) << std::setw(14)
        << num(std::abs(res.block_gaps[k + 1][1])) << std::setw(14)
        << num(std::abs(res.block_gaps[k + 1][0])) << "\n";
  out << "final |w-u|=" << num(res.final_gap_w) << " predicted=" << num(res.predicted_gap_w)
      << " final |w_ag-u_ag|=" << num(res.final_gap_ag)
      << " predicted=" << num(res.predicted_gap_ag) << "\n";
  clock.report(out);
  return 0;
}

int cmd_norm_bounds(double mu, double L, Index samples, const Common &common,
                    std::ostream &out) {
  const Stopwatch clock(common);
  if (!(mu > 0) || !(L >= mu))
    throw std::invalid_argument("need 0 < mu <= L");
  std::vector<NormBoundPoint> grid;
  for (double scale : {1.0, 0.1, 0.01}) {
    const double eta = scale / L;
    const double top = std::sqrt(eta / mu);
    for (double gamma : {eta, std::sqrt(eta * top), top})
      grid.push_back({gamma, eta});
  }
  const NormBoundReport rep = norm_bound_sweep(mu, L, grid, samples);
  out << std::left << std::setw(8) << "schedule" << std::right << std::setw(13) << "gamma"
      << std::setw(13) << "eta" << std::setw(13) << "max_norm" << std::setw(13) << "argmax_H"
      << std::setw(13) << "bound" << "\n";
  for (const auto &row : rep.rows)
    out << std::left << std::setw(8) << to_string(row.schedule) << std::right << std::setw(13)
        << num(row.gamma) << std::setw(13) << num(row.eta) << std::setw(13) << num(row.max_norm)
        << std::setw(13) << num(row.argmax_H) << std::setw(13) << num(row.bound)
        << (row.violated ? "  VIOLATED" : "") << "\n";
  out << "violations=" << rep.violations << "\n";
  clock.report(out);
  if (rep.violations > 0)
    throw Error(ErrorKind::verification,
                std::to_string(rep.violations) + " transformed-norm bound violations");
  return 0;
}

int cmd_verify(const Common &common, const std::string &data_dir, std::ostream &out) {
  const Stopwatch clock(common);
  std::vector<CheckResult> results = run_core_checks(common.threads);
  const std::filesystem::path dir = data_dir.empty() ? default_data_dir() : std::filesystem::path(data_dir);
  results.push_back(check_dataset_shapes(dir));
  results.push_back(check_speedup_ordering(dir, common.threads));
  Index failures = 0;
  for (const auto &r : results) {
    out << to_string(r.status) << " " << r.name << ": " << r.detail;
    if (!common.deterministic)
      out << " [" << num(r.seconds) << " s]";
    out << "\n";
    failures += r.status == CheckStatus::fail;
  }
  clock.report(out);
  if (failures > 0)
    throw Error(ErrorKind::verification, std::to_string(failures) + " check(s) failed");
  return 0;
}

int report(std::ostream &err, ErrorKind kind, const std::string &detail) {
  std::string line = detail;
  std::replace(line.begin(), line.end(), '\n', ' ');
  err << "error: " << to_string(kind) << ": " << line << "\n";
  return static_cast<int>(kind);
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Federated accelerated SGD simulator and stability diagnostics", "fedac"};
  app.require_subcommand(0, 1);

  Common common;

  std::string data_path;
  std::optional<Index> data_dim;
  auto *check = app.add_subcommand("check-data", "Parse a LibSVM file and print its shape");
  check->add_option("path", data_path, "LibSVM file (.gz accepted)")->required();
  check->add_option("--dim", data_dim, "Declared feature dimension");

  RunArgs run_args;
  auto *run = app.add_subcommand("run", "Run one (algorithm, M, K, eta, seed) cell");
  add_run_options(*run, run_args);
  run->add_option("--algorithm", run_args.algorithm,
                  "fedac1|fedac2|fedac_vanilla|fedavg|mb_sgd|mb_acsgd");
  run->add_option("--M", run_args.M, "Workers");
  run->add_option("--K", run_args.K, "Synchronization interval");
  run->add_option("--T", run_args.T, "Parallel runtime (steps per worker)");
  run->add_option("--eval-every", run_args.eval_every, "Steps between evaluations");
  run->add_option("--eta", run_args.eta, "Learning rate");
  run->add_option("--seed", run_args.seed, "Random seed");
  add_common(*run, common);

  RunArgs sweep_args;
  auto *sweep = app.add_subcommand("sweep", "Tune eta and sweep algorithms over (M, K)");
  add_run_options(*sweep, sweep_args);
  add_common(*sweep, common);

  double kappa = 25, eps = 1e-9;
  Index inst_K = 4;
  auto *inst = app.add_subcommand("instability", "Amplify an initial gap under deterministic AGD");
  inst->add_option("--kappa", kappa, "Condition number L/mu (>= 25)");
  inst->add_option("--K", inst_K, "Number of three-step blocks")->check(CLI::NonNegativeNumber);
  inst->add_option("--eps", eps, "Initial gap in both coordinates");
  add_common(*inst, common);

  double nb_mu = 0.01, nb_L = 1.0;
  Index nb_samples = 21;
  auto *bounds = app.add_subcommand("norm-bounds", "Transformed transfer-matrix norms vs bounds");
  bounds->add_option("--mu", nb_mu, "Strong convexity");
  bounds->add_option("--L", nb_L, "Smoothness");
  bounds->add_option("--samples", nb_samples, "Curvature samples in [mu, L]")
      ->check(CLI::Range(Index{2}, Index{1'000'000}));
  add_common(*bounds, common);

  std::string data_dir;
  auto *verify = app.add_subcommand("verify", "Run the invariant suite");
  verify->add_option("--data-dir", data_dir, "Directory holding a9a (default FEDAC_DATA_DIR)");
  add_common(*verify, common);

  if (args.empty()) {
    out << app.help();
    return report(err, ErrorKind::usage, "no subcommand given");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    const CLI::App *target = &app;
    for (auto *sub : app.get_subcommands())
      target = sub;
    out << target->help();
    return 0;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError &e) {
    return report(err, ErrorKind::usage, e.what());
  }

  try {
    if (check->parsed())
      return cmd_check_data(data_path, data_dim, out);
    const auto threads_given = [&](CLI::App *sub) { return sub->count("--threads") > 0; };
    if (run->parsed())
      return cmd_run(run_args, common, threads_given(run), out);
    if (sweep->parsed())
      return cmd_sweep(sweep_args, common, threads_given(sweep), out);
    if (inst->parsed())
      return cmd_instability(kappa, inst_K, eps, common, out);
    if (bounds->parsed())
      return cmd_norm_bounds(nb_mu, nb_L, nb_samples, common, out);
    if (verify->parsed())
      return cmd_verify(common, data_dir, out);
    out << app.help();
    return report(err, ErrorKind::usage, "no subcommand given");
  } catch (const Error &e) {
    return report(err, e.kind(), e.what());
  } catch (const std::invalid_argument &e) {
    return report(err, ErrorKind::usage, e.what());
  } catch (const std::domain_error &e) {
    return report(err, ErrorKind::numerical, e.what());
  } catch (const std::exception &e) {
    return report(err, ErrorKind::numerical, e.what());
  }
}

} // namespace fedac
