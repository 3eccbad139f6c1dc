#include "fedac/harness.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fedac/error.hpp"
#include "fedac/parallel.hpp"
#include "fedac/schedule.hpp"

namespace fedac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void usage(const std::string &what) { throw Error(ErrorKind::usage, what); }

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view value) {
  std::vector<std::string_view> items;
  while (true) {
    const auto comma = value.find(',');
    items.push_back(trim(value.substr(0, comma)));
    if (comma == std::string_view::npos)
      break;
    value.remove_prefix(comma + 1);
  }
  return items;
}

template <typename Int> Int parse_int(std::string_view key, std::string_view text) {
  Int out{};
  text = trim(text);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    usage("config key '" + std::string(key) + "': not an integer: '" + std::string(text) + "'");
  return out;
}

double parse_real(std::string_view key, std::string_view text) {
  try {
    return parse_double(trim(text));
  } catch (const std::invalid_argument &) {
    usage("config key '" + std::string(key) + "': not a number: '" + std::string(text) + "'");
  }
}

template <typename T, typename Fn>
std::vector<T> parse_list(std::string_view value, Fn &&one) {
  std::vector<T> out;
  for (auto item : split_list(value))
    out.push_back(one(item));
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double nonneg_or_inf(double v) { return std::isnan(v) ? kInf : v; }

// Optimum cache file: "f_star iterations grad_norm dim" then one coordinate per line.
std::optional<Optimum> read_cached_optimum(const std::filesystem::path &path, Index dim) {
  std::ifstream in(path);
  if (!in)
    return std::nullopt;
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line))
    lines.push_back(line);
  if (lines.empty())
    return std::nullopt;
  try {
    std::istringstream head(lines[0]);
    std::string f, it, gn, d;
    head >> f >> it >> gn >> d;
    if (std::stoll(d) != dim || static_cast<Index>(lines.size()) != dim + 1)
      return std::nullopt;
    Optimum opt;
    opt.f_star = parse_double(f);
    opt.iterations = std::stoll(it);
    opt.grad_norm = parse_double(gn);
    opt.w_star.resize(dim);
    for (Index i = 0; i < dim; ++i)
      opt.w_star[i] = parse_double(lines[static_cast<std::size_t>(i + 1)]);
    return opt;
  } catch (const std::exception &) {
    return std::nullopt;
  }
}

void write_cached_optimum(const std::filesystem::path &path, const Optimum &opt) {
  std::string text = format_double(opt.f_star) + " " + std::to_string(opt.iterations) + " " +
                     format_double(opt.grad_norm) + " " + std::to_string(opt.w_star.size()) +
                     "\n";
  for (Index i = 0; i < opt.w_star.size(); ++i)
    text += format_double(opt.w_star[i]) + "\n";
  write_text(path, text);
}

Objective quadratic_from(const ExperimentConfig &cfg) {
  const Index d = cfg.quad_dim;
  Vector spectrum(d);
  for (Index i = 0; i < d; ++i) {
    const double frac = d == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(d - 1);
    spectrum[i] = cfg.quad_mu * std::pow(cfg.quad_L / cfg.quad_mu, frac);
  }
  spectrum[d - 1] = cfg.quad_L;
  return make_quadratic(std::move(spectrum), Vector::Ones(d), cfg.quad_sigma);
}

RunResult dispatch(const Objective &obj, const CellSpec &cell, Index T,
                   const RunOptions &options) {
  const double mu = obj.mu_est();
  switch (cell.algorithm) {
  case Algorithm::fedac1:
    return fedac_run(obj, cell.M, T, cell.K, schedule_fedac1(cell.eta, mu, cell.K), cell.seed,
                     options);
  case Algorithm::fedac2:
    return fedac_run(obj, cell.M, T, cell.K, schedule_fedac2(cell.eta, mu, cell.K), cell.seed,
                     options);
  case Algorithm::fedac_vanilla:
    return fedac_run(obj, cell.M, T, cell.K, schedule_vanilla(cell.eta, mu), cell.seed, options);
  case Algorithm::fedavg:
    return fedavg_run(obj, cell.M, T, cell.K, cell.eta, cell.seed, options);
  case Algorithm::mb_sgd:
    return mb_sgd_run(obj, cell.M, T, cell.K, cell.eta, cell.seed, options);
  case Algorithm::mb_acsgd:
    return mb_acsgd_run(obj, cell.M, T, cell.K, cell.eta, cell.seed, options);
  }
  throw std::logic_error("unknown algorithm");
}

} // namespace

// Names and grids -----------------------------------------------------------

const char *to_string(Algorithm algorithm) noexcept {
  switch (algorithm) {
  case Algorithm::fedac1: return "fedac1";
  case Algorithm::fedac2: return "fedac2";
  case Algorithm::fedac_vanilla: return "fedac_vanilla";
  case Algorithm::fedavg: return "fedavg";
  case Algorithm::mb_sgd: return "mb_sgd";
  case Algorithm::mb_acsgd: return "mb_acsgd";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  for (auto a : {Algorithm::fedac1, Algorithm::fedac2, Algorithm::fedac_vanilla,
                 Algorithm::fedavg, Algorithm::mb_sgd, Algorithm::mb_acsgd})
    if (name == to_string(a))
      return a;
  usage("unknown algorithm '" + std::string(name) + "'");
}

std::vector<double> default_eta_grid() {
  return {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1, 2, 5, 10};
}

// Config --------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (objective != "logistic" && objective != "synthetic_logistic" && objective != "quadratic")
    usage("objective must be logistic, synthetic_logistic or quadratic");
  if (objective == "logistic" && data.empty())
    usage("objective 'logistic' needs a data path");
  if (objective != "quadratic" && !(lambda > 0))
    usage("lambda must be positive");
  if (objective == "quadratic" &&
      (quad_dim < 1 || !(quad_mu > 0) || !(quad_L >= quad_mu) || !(quad_sigma >= 0)))
    usage("quadratic needs quad_dim >= 1, 0 < quad_mu <= quad_L, quad_sigma >= 0");
  if (objective == "synthetic_logistic" &&
      (synth_n < 1 || synth_dim < 1 || synth_nnz < 1 || synth_nnz > synth_dim))
    usage("synthetic data needs n, dim >= 1 and 1 <= nnz <= dim");
  if (algorithms.empty() || K.empty() || M.empty() || eta.empty() || seeds.empty())
    usage("algorithms, K, M, eta and seeds must be nonempty");
  if (T < 1)
    usage("T must be positive");
  for (Index k : K)
    if (k < 1 || T % k != 0)
      usage("every K must be positive and divide T (K=" + std::to_string(k) + ")");
  for (Index m : M)
    if (m < 1)
      usage("every M must be positive");
  for (double e : eta)
    if (!(e > 0) || !std::isfinite(e))
      usage("every eta must be positive and finite");
  if (eval_every < 1 || T % eval_every != 0)
    usage("eval_every must be positive and divide T");
  if (!(optimum_tol > 0))
    usage("optimum_tol must be positive");
  if (threads < 1)
    usage("threads must be positive");
}

std::vector<std::string> config_keys() {
  return {"objective",  "data",      "dim",        "lambda",    "synth_n",
          "synth_dim",  "synth_nnz", "synth_seed", "quad_dim",  "quad_mu",
          "quad_L",     "quad_sigma", "algorithms", "T",        "K",
          "M",          "eta",       "seeds",      "eval_every", "optimum_tol",
          "threads",    "out_dir"};
}

void apply_config_value(ExperimentConfig &cfg, std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  const auto index_list = [&] {
    return parse_list<Index>(value, [&](std::string_view s) { return parse_int<Index>(key, s); });
  };
  if (key == "objective") cfg.objective = std::string(value);
  else if (key == "data") cfg.data = std::string(value);
  else if (key == "dim") {
    if (value.empty() || value == "auto") cfg.dim.reset();
    else cfg.dim = parse_int<Index>(key, value);
  }
  else if (key == "lambda") cfg.lambda = parse_real(key, value);
  else if (key == "synth_n") cfg.synth_n = parse_int<Index>(key, value);
  else if (key == "synth_dim") cfg.synth_dim = parse_int<Index>(key, value);
  else if (key == "synth_nnz") cfg.synth_nnz = parse_int<Index>(key, value);
  else if (key == "synth_seed") cfg.synth_seed = parse_int<std::uint64_t>(key, value);
  else if (key == "quad_dim") cfg.quad_dim = parse_int<Index>(key, value);
  else if (key == "quad_mu") cfg.quad_mu = parse_real(key, value);
  else if (key == "quad_L") cfg.quad_L = parse_real(key, value);
  else if (key == "quad_sigma") cfg.quad_sigma = parse_real(key, value);
  else if (key == "algorithms" || key == "algorithm")
    cfg.algorithms = parse_list<Algorithm>(value, parse_algorithm);
  else if (key == "T") cfg.T = parse_int<Index>(key, value);
  else if (key == "K") cfg.K = index_list();
  else if (key == "M") cfg.M = index_list();
  else if (key == "eta")
    cfg.eta = parse_list<double>(value, [&](std::string_view s) { return parse_real(key, s); });
  else if (key == "seeds")
    cfg.seeds = parse_list<std::uint64_t>(
        value, [&](std::string_view s) { return parse_int<std::uint64_t>(key, s); });
  else if (key == "eval_every") cfg.eval_every = parse_int<Index>(key, value);
  else if (key == "optimum_tol") cfg.optimum_tol = parse_real(key, value);
  else if (key == "threads") cfg.threads = parse_int<int>(key, value);
  else if (key == "out_dir") cfg.out_dir = std::string(value);
  else usage("unknown config key '" + std::string(key) + "'");
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      usage("config line " + std::to_string(line_no) + ": expected 'key = value'");
    apply_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    usage("cannot read config " + path.string() + ": " + std::strerror(errno));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// Optimum -------------------------------------------------------------------

Optimum compute_optimum(const Objective &obj, double tol, Index max_iterations,
                        const Vector &start) {
  const double mu = obj.mu_est();
  const double L = obj.l_est();
  if (!(mu > 0))
    throw std::invalid_argument("compute_optimum: objective must be strongly convex");
  const Vector x0 = start.size() == 0 ? Vector::Zero(obj.dim()) : start;
  if (x0.size() != obj.dim())
    throw std::invalid_argument("compute_optimum: start has the wrong dimension");

  const AgdStep step{L, mu};
  Vector w_ag = x0, w = x0;
  double f = eval(obj, w_ag);
  double gnorm = grad(obj, w_ag).norm();
  Index it = 0;
  while (!(gnorm <= tol * (1.0 + std::abs(f)))) {
    if (it >= max_iterations) {
      std::ostringstream msg;
      msg << "optimum not reached after " << it << " iterations; gradient norm " << gnorm;
      throw Error(ErrorKind::numerical, msg.str());
    }
    const Vector md = step.mid(w_ag, w);
    const Vector g = grad(obj, md);
    w = step.next_w(w, md, g);
    w_ag = step.next_ag(md, g);
    f = eval(obj, w_ag);
    gnorm = grad(obj, w_ag).norm();
    ++it;
    if (!std::isfinite(f) || !std::isfinite(gnorm))
      throw Error(ErrorKind::numerical, "optimum search diverged at iteration " + std::to_string(it));
  }
  return Optimum{w_ag, f, it, gnorm};
}

Problem build_problem(const ExperimentConfig &cfg, const std::filesystem::path &cache_dir) {
  cfg.validate();
  if (cfg.objective == "quadratic") {
    auto obj = std::make_shared<const Objective>(quadratic_from(cfg));
    return Problem{obj, Optimum{Vector::Ones(cfg.quad_dim), 0.0, 0, 0.0}};
  }

  std::shared_ptr<const Dataset> data;
  if (cfg.objective == "logistic")
    data = std::make_shared<const Dataset>(load_libsvm(cfg.data, cfg.dim));
  else
    data = std::make_shared<const Dataset>(
        make_synthetic_binary(cfg.synth_n, cfg.synth_dim, cfg.synth_nnz, cfg.synth_seed));
  auto obj = std::make_shared<const Objective>(make_logistic(data, cfg.lambda));

  std::filesystem::path cache;
  if (!cache_dir.empty())
    cache = cache_dir / ("optimum-" + hex64(dataset_hash(*data)) + "-" +
                         format_double(cfg.lambda) + ".txt");
  if (!cache.empty())
    if (auto cached = read_cached_optimum(cache, obj->dim()))
      return Problem{obj, std::move(*cached)};
  Optimum opt = compute_optimum(*obj, cfg.optimum_tol);
  if (!cache.empty())
    write_cached_optimum(cache, opt);
  return Problem{obj, std::move(opt)};
}

// Runs ----------------------------------------------------------------------

CellResult run_experiment(const Problem &problem, const ExperimentConfig &cfg,
                          const CellSpec &cell, int threads) {
  const Objective &obj = *problem.objective;
  const double f_star = problem.optimum.f_star;
  const auto gap = [&](const Vector &x) { return nonneg_or_inf(eval(obj, x) - f_star); };

  CellResult out;
  out.spec = cell;
  RunOptions options;
  options.eval_every = cfg.eval_every;
  options.threads = threads;
  options.evaluate = gap;
  options.on_record = [&](const EvalRecord &r) { out.records.push_back(r); };

  std::optional<RunResult> run;
  try {
    run = dispatch(obj, cell, cfg.T, options);
  } catch (const DivergenceError &) {
    out.diverged = true;
  } catch (const std::invalid_argument &) {
    // Hyperparameters outside the schedule's domain count as divergence.
    out.diverged = true;
  }

  const Index expected = cfg.T / cfg.eval_every + 1;
  Index next_t = out.records.empty() ? 0 : out.records.back().t + cfg.eval_every;
  while (static_cast<Index>(out.records.size()) < expected) {
    out.records.push_back({next_t, kInf});
    next_t += cfg.eval_every;
  }

  out.best_suboptimality = kInf;
  for (const auto &r : out.records)
    out.best_suboptimality = std::min(out.best_suboptimality, r.suboptimality);
  if (run && cell.algorithm == Algorithm::fedavg)
    out.best_suboptimality = std::min(out.best_suboptimality, gap(run->weighted_avg_w));
  return out;
}

double median(std::vector<double> values) {
  if (values.empty())
    throw std::invalid_argument("median of an empty list");
  for (double &v : values)
    v = nonneg_or_inf(v);
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1)
    return values[n / 2];
  const double a = values[n / 2 - 1], b = values[n / 2];
  return b == kInf ? kInf : 0.5 * (a + b);
}

SweepResult tune_and_sweep(const Problem &problem, const ExperimentConfig &cfg) {
  cfg.validate();
  std::vector<double> etas = cfg.eta;
  std::sort(etas.begin(), etas.end());
  etas.erase(std::unique(etas.begin(), etas.end()), etas.end());

  std::vector<CellSpec> specs;
  for (Algorithm a : cfg.algorithms)
    for (Index m : cfg.M)
      for (Index k : cfg.K)
        for (double eta : etas)
          for (std::uint64_t seed : cfg.seeds)
            specs.push_back({a, m, k, eta, seed});

  SweepResult result;
  result.cells.resize(specs.size());
  ThreadPool pool(std::max(1, std::min<int>(cfg.threads, static_cast<int>(specs.size()))));
  pool.parallel_for(static_cast<Index>(specs.size()), [&](Index i) {
    const auto j = static_cast<std::size_t>(i);
    result.cells[j] = run_experiment(problem, cfg, specs[j], 1);
  });

  const std::size_t per_eta = cfg.seeds.size();
  const std::size_t per_group = per_eta * etas.size();
  for (std::size_t g = 0; g < result.cells.size(); g += per_group) {
    SweepRow row;
    row.algorithm = specs[g].algorithm;
    row.M = specs[g].M;
    row.K = specs[g].K;
    row.seeds = static_cast<Index>(per_eta);
    row.best_eta = etas.front();
    row.best_suboptimality = kInf;
    for (std::size_t e = 0; e < etas.size(); ++e) {
      std::vector<double> bests;
      for (std::size_t s = 0; s < per_eta; ++s)
        bests.push_back(result.cells[g + e * per_eta + s].best_suboptimality);
      const double med = median(std::move(bests));
      if (med < row.best_suboptimality) {
        row.best_suboptimality = med;
        row.best_eta = etas[e];
      }
    }
    row.all_diverged = std::all_of(result.cells.begin() + static_cast<std::ptrdiff_t>(g),
                                   result.cells.begin() + static_cast<std::ptrdiff_t>(g + per_group),
                                   [](const CellResult &c) { return c.diverged; });
    if (row.all_diverged) {
      row.best_eta = etas.front();
      row.best_suboptimality = kInf;
    }
    result.rows.push_back(row);
  }
  return result;
}

// Serialization -------------------------------------------------------------

std::string format_double(double value) {
  if (std::isnan(value))
    return "nan";
  if (std::isinf(value))
    return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+')
    text.remove_prefix(1);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  return out;
}

std::vector<RecordRow> flatten_records(std::span<const CellResult> cells) {
  std::vector<RecordRow> rows;
  for (const auto &c : cells)
    for (const auto &r : c.records)
      rows.push_back({c.spec.algorithm, c.spec.M, c.spec.K, c.spec.eta, c.spec.seed, r.t,
                      r.suboptimality});
  return rows;
}

bool operator==(const SweepRow &a, const SweepRow &b) {
  const auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.algorithm == b.algorithm && a.M == b.M && a.K == b.K && same(a.best_eta, b.best_eta) &&
         same(a.best_suboptimality, b.best_suboptimality);
}

static constexpr std::string_view kRecordsHeader = "algorithm,M,K,eta,seed,t,suboptimality";
static constexpr std::string_view kSweepHeader = "algorithm,M,K,best_eta,best_suboptimality";

std::string records_csv(std::span<const RecordRow> rows) {
  std::string out(kRecordsHeader);
  out += '\n';
  for (const auto &r : rows) {
    out += to_string(r.algorithm);
    out += ',' + std::to_string(r.M) + ',' + std::to_string(r.K) + ',' + format_double(r.eta) +
           ',' + std::to_string(r.seed) + ',' + std::to_string(r.t) + ',' +
           format_double(r.suboptimality) + '\n';
  }
  return out;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string out(kSweepHeader);
  out += '\n';
  for (const auto &r : rows) {
    out += to_string(r.algorithm);
    out += ',' + std::to_string(r.M) + ',' + std::to_string(r.K) + ',' +
           format_double(r.best_eta) + ',' + format_double(r.best_suboptimality) + '\n';
  }
  return out;
}

namespace {

std::vector<std::vector<std::string_view>> csv_body(std::string_view text,
                                                    std::string_view header) {
  std::vector<std::vector<std::string_view>> rows;
  bool first = true;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    if (first) {
      if (line != header)
        throw Error(ErrorKind::data, "unexpected CSV header '" + std::string(line) + "'");
      first = false;
      continue;
    }
    if (line.empty())
      continue;
    auto fields = split_list(line);
    const auto want = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',') + 1);
    if (fields.size() != want)
      throw Error(ErrorKind::data, "CSV line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(want) + " fields");
    rows.push_back(std::move(fields));
  }
  if (first)
    throw Error(ErrorKind::data, "CSV is missing its header");
  return rows;
}

template <typename Fn> auto data_errors(Fn &&fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error &e) {
    if (e.kind() == ErrorKind::data)
      throw;
    throw Error(ErrorKind::data, e.what());
  } catch (const std::exception &e) {
    throw Error(ErrorKind::data, e.what());
  }
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double from_json_number(const nlohmann::json &j) {
  return j.is_null() ? kInf : j.get<double>();
}

} // namespace

std::vector<RecordRow> parse_records_csv(std::string_view text) {
  return data_errors([&] {
    std::vector<RecordRow> out;
    for (const auto &f : csv_body(text, kRecordsHeader))
      out.push_back({parse_algorithm(f[0]), parse_int<Index>("M", f[1]),
                     parse_int<Index>("K", f[2]), parse_double(f[3]),
                     parse_int<std::uint64_t>("seed", f[4]), parse_int<Index>("t", f[5]),
                     parse_double(f[6])});
    return out;
  });
}

std::vector<SweepRow> parse_sweep_csv(std::string_view text) {
  return data_errors([&] {
    std::vector<SweepRow> out;
    for (const auto &f : csv_body(text, kSweepHeader)) {
      SweepRow row;
      row.algorithm = parse_algorithm(f[0]);
      row.M = parse_int<Index>("M", f[1]);
      row.K = parse_int<Index>("K", f[2]);
      row.best_eta = parse_double(f[3]);
      row.best_suboptimality = parse_double(f[4]);
      row.all_diverged = !std::isfinite(row.best_suboptimality);
      out.push_back(row);
    }
    return out;
  });
}

std::string records_json(std::span<const RecordRow> rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto &r : rows)
    arr.push_back({{"algorithm", to_string(r.algorithm)},
                   {"M", r.M},
                   {"K", r.K},
                   {"eta", number_or_null(r.eta)},
                   {"seed", r.seed},
                   {"t", r.t},
                   {"suboptimality", number_or_null(r.suboptimality)}});
  return arr.dump(1) + "\n";
}

std::string sweep_json(std::span<const SweepRow> rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto &r : rows)
    arr.push_back({{"algorithm", to_string(r.algorithm)},
                   {"M", r.M},
                   {"K", r.K},
                   {"best_eta", number_or_null(r.best_eta)},
                   {"best_suboptimality", number_or_null(r.best_suboptimality)}});
  return arr.dump(1) + "\n";
}

std::vector<RecordRow> parse_records_json(std::string_view text) {
  return data_errors([&] {
    std::vector<RecordRow> out;
    for (const auto &j : nlohmann::json::parse(text))
      out.push_back({parse_algorithm(j.at("algorithm").get<std::string>()),
                     j.at("M").get<Index>(), j.at("K").get<Index>(),
                     from_json_number(j.at("eta")), j.at("seed").get<std::uint64_t>(),
                     j.at("t").get<Index>(), from_json_number(j.at("suboptimality"))});
    return out;
  });
}

std::vector<SweepRow> parse_sweep_json(std::string_view text) {
  return data_errors([&] {
    std::vector<SweepRow> out;
    for (const auto &j : nlohmann::json::parse(text)) {
      SweepRow row;
      row.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
      row.M = j.at("M").get<Index>();
      row.K = j.at("K").get<Index>();
      row.best_eta = from_json_number(j.at("best_eta"));
      row.best_suboptimality = from_json_number(j.at("best_suboptimality"));
      row.all_diverged = !std::isfinite(row.best_suboptimality);
      out.push_back(row);
    }
    return out;
  });
}

void write_text(const std::filesystem::path &path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path(), ec);
  if (ec)
    throw Error(ErrorKind::data, "cannot create directory " + path.parent_path().string() +
                                     ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorKind::data, "cannot write " + path.string() + ": " + std::strerror(errno));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out)
    throw Error(ErrorKind::data, "cannot write " + path.string() + ": " + std::strerror(errno));
}

void write_csv(std::span<const RecordRow> rows, const std::filesystem::path &path) {
  write_text(path, records_csv(rows));
}
void write_csv(std::span<const SweepRow> rows, const std::filesystem::path &path) {
  write_text(path, sweep_csv(rows));
}
void write_json(std::span<const RecordRow> rows, const std::filesystem::path &path) {
  write_text(path, records_json(rows));
}
void write_json(std::span<const SweepRow> rows, const std::filesystem::path &path) {
  write_text(path, sweep_json(rows));
}

} // namespace fedac
