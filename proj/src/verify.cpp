#include "fedac/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "fedac/algorithms.hpp"
#include "fedac/dataset.hpp"
#include "fedac/diagnostics.hpp"
#include "fedac/error.hpp"
#include "fedac/harness.hpp"
#include "fedac/instability.hpp"
#include "fedac/objective.hpp"
#include "fedac/rng.hpp"
#include "fedac/schedule.hpp"

namespace fedac {

namespace {

/// FNV-1a over the bit patterns of every recorded number.
class Fingerprint {
public:
  void add(double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    mix(bits);
  }
  void add(const Vector &v) {
    mix(static_cast<std::uint64_t>(v.size()));
    for (Index i = 0; i < v.size(); ++i)
      add(v[i]);
  }
  void add(const std::vector<EvalRecord> &records) {
    for (const auto &r : records) {
      mix(static_cast<std::uint64_t>(r.t));
      add(r.suboptimality);
    }
  }
  void add(std::string_view text) {
    for (unsigned char c : text)
      mix(c);
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
  }

private:
  void mix(std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= (word >> (8 * i)) & 0xffu;
      state_ *= 0x100000001b3ull;
    }
  }
  std::uint64_t state_ = 0xcbf29ce484222325ull;
};

/// Uniform draws for randomized checks, one fixed stream per check.
class Draws {
public:
  explicit Draws(std::uint64_t seed) : stream_(make_stream(seed, 0)) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * draw_uniform(stream_); }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  Index index(Index lo, Index hi) { return lo + draw_index(stream_, hi - lo + 1); }
  Vector gaussian(Index n) { return draw_gaussian(stream_, n); }

private:
  RngStream stream_;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

template <typename Fn> CheckResult timed(std::string name, Fn &&body) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult r;
  r.name = std::move(name);
  try {
    body(r);
  } catch (const std::exception &e) {
    r.status = CheckStatus::fail;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

double max_abs_diff(const Vector &a, const Vector &b) {
  return a.size() == b.size() ? (a - b).cwiseAbs().maxCoeff()
                              : std::numeric_limits<double>::infinity();
}

bool bitwise_equal(const Vector &a, const Vector &b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

} // namespace

const char *to_string(CheckStatus status) noexcept {
  switch (status) {
  case CheckStatus::pass: return "PASS";
  case CheckStatus::fail: return "FAIL";
  case CheckStatus::skip: return "SKIP";
  }
  return "?";
}

CheckResult check_equivalences(int threads) {
  return timed("equivalence", [&](CheckResult &r) {
    Fingerprint fp;
    Vector spectrum(5), shift(5);
    spectrum << 0.1, 0.3, 0.5, 0.8, 1.0;
    shift << 1.0, -0.5, 0.25, 2.0, -1.0;
    const Objective noisy = make_quadratic(spectrum, shift, 1.0);
    const Objective clean = make_quadratic(spectrum, shift, 0.0);
    RunOptions opts;
    opts.threads = threads;
    opts.eval_every = 10;
    opts.evaluate = [&](const Vector &w) { return eval(noisy, w); };

    // (a) synchronized local SGD is minibatch SGD
    const RunResult avg = fedavg_run(noisy, 4, 100, 1, 0.1, 7, opts);
    const RunResult mb = mb_sgd_run(noisy, 4, 100, 1, 0.1, 7, opts);
    const bool a_ok = bitwise_equal(avg.final_avg_w, mb.final_avg_w) &&
                      avg.eval_records == mb.eval_records;
    fp.add(avg.final_avg_w);
    fp.add(avg.eval_records);

    // (b) without noise the workers never disagree, so K is irrelevant
    const Hyper h = schedule_fedac1(0.1, clean.mu_est(), 1);
    RunOptions plain;
    plain.threads = threads;
    const RunResult ref = fedac_run(clean, 4, 100, 1, h, 3, plain);
    double k_spread = 0.0;
    for (Index K : {2, 5, 100}) {
      const RunResult other = fedac_run(clean, 4, 100, K, h, 3, plain);
      k_spread = std::max({k_spread, max_abs_diff(ref.final_avg_w_ag, other.final_avg_w_ag),
                           max_abs_diff(ref.final_avg_w, other.final_avg_w)});
    }
    const bool b_ok = k_spread <= tolerance::equivalence_k_sweep;
    fp.add(ref.final_avg_w_ag);
    fp.add(k_spread);

    // (c) accelerated minibatch SGD is one FedAc worker on a batched oracle
    const RunResult acc = mb_acsgd_run(noisy, 4, 100, 5, 0.05, 11, plain);
    const RunResult core =
        fedac_run({make_batched_sampler(noisy, 11, 20)}, noisy.dim(), 20, 1,
                  schedule_vanilla(0.05, noisy.mu_est()), plain);
    const bool c_ok = bitwise_equal(acc.final_avg_w_ag, core.final_avg_w_ag) &&
                      bitwise_equal(acc.final_avg_w, core.final_avg_w);
    fp.add(acc.final_avg_w_ag);

    r.status = a_ok && b_ok && c_ok ? CheckStatus::pass : CheckStatus::fail;
    r.detail = std::string("fedavg==mb_sgd:") + (a_ok ? "bitwise" : "DIFFER") +
               " K-sweep max|diff|=" + fmt(k_spread) +
               " mb_acsgd==fedac:" + (c_ok ? "bitwise" : "DIFFER");
    r.fingerprint = fp.hex();
  });
}

CheckResult check_norm_bounds(Index points, Index h_samples) {
  return timed("norm-bounds", [&](CheckResult &r) {
    Fingerprint fp;
    Draws draws(20201);
    Index violations = 0, evaluated = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (Index p = 0; p < points; ++p) {
      const double mu = draws.log_uniform(1e-4, 1.0);
      const double L = mu * draws.log_uniform(1.0, 1e4);
      const double eta = draws.log_uniform(1e-3 / L, 1.0 / L);
      // Every tenth point sits on the gamma == eta edge.
      const double gamma_hi = std::sqrt(eta / mu);
      const double gamma = p % 10 == 0 ? eta : draws.log_uniform(eta, gamma_hi);
      const NormBoundPoint pt{std::clamp(gamma, eta, gamma_hi), eta};
      const NormBoundReport rep =
          norm_bound_sweep(mu, L, std::span(&pt, 1), h_samples, tolerance::norm_bound);
      violations += rep.violations;
      worst = std::max(worst, rep.max_excess);
      evaluated += static_cast<Index>(rep.rows.size());
      for (const auto &row : rep.rows)
        fp.add(row.max_norm);
    }
    r.status = violations == 0 ? CheckStatus::pass : CheckStatus::fail;
    r.detail = std::to_string(points) + " points x " + std::to_string(h_samples) +
               " curvatures x 2 schedules (" + std::to_string(evaluated) +
               " rows), violations=" + std::to_string(violations) +
               " max(norm-bound)=" + fmt(worst);
    r.fingerprint = fp.hex();
  });
}

CheckResult check_potential_contraction(Index problems, Index steps) {
  return timed("potential-contraction", [&](CheckResult &r) {
    Fingerprint fp;
    Draws draws(515);
    Index violations = 0;
    double worst = 0.0; // max of Psi_{t+1} / ((1 - gamma mu) Psi_t)
    for (Index q = 0; q < problems; ++q) {
      const Index d = draws.index(2, 10);
      const double mu = draws.log_uniform(1e-3, 1.0);
      const double L = mu * draws.log_uniform(1.0, 1e3);
      Vector spectrum(d);
      for (Index i = 0; i < d; ++i)
        spectrum[i] = draws.uniform(mu, L);
      spectrum[0] = mu;
      spectrum[d - 1] = L;
      // Optimum at the origin: F* = 0 exactly, so the potential has no floor.
      const Objective obj = make_quadratic(spectrum, Vector::Zero(d), 0.0);
      const Hyper h = schedule_fedac1(1.0 / L, mu, 1);
      const double rate = 1.0 - h.gamma * mu;
      const Vector w_star = Vector::Zero(d);

      RunOptions opts;
      opts.w0 = draws.gaussian(d);
      std::vector<double> psi;
      opts.observer = [&](Index, std::span<const WorkerState> ws) {
        psi.push_back(potential_psi(ws, obj, mu, w_star, 0.0));
      };
      fedac_run(obj, 2, steps, 1, h, q, opts);
      for (std::size_t t = 0; t + 1 < psi.size(); ++t) {
        const double allowed = rate * psi[t];
        if (psi[t + 1] > allowed * (1.0 + tolerance::contraction))
          ++violations;
        if (allowed > 0)
          worst = std::max(worst, psi[t + 1] / allowed);
      }
      fp.add(psi.back());
    }
    r.status = violations == 0 ? CheckStatus::pass : CheckStatus::fail;
    r.detail = std::to_string(problems) + " quadratics x " + std::to_string(steps) +
               " steps, violations=" + std::to_string(violations) +
               " max Psi'/((1-gamma mu)Psi)=" + fmt(worst);
    r.fingerprint = fp.hex();
  });
}

CheckResult check_instability(std::vector<Index> Ks) {
  return timed("instability", [&](CheckResult &r) {
    Fingerprint fp;
    const double mu = 1.0, L = 25.0, eps = 1e-9;
    bool ok = true;
    double worst_ratio = 0.0, worst_residual = 0.0;
    std::string gaps;
    for (Index K : Ks) {
      const InstabilityObjective setup = construct_instability_objective(L, mu, K);
      const double scale = std::max(std::abs(setup.w0), std::abs(setup.w0_ag));
      const InstabilityResult res = instability_experiment(setup, eps * scale, K);
      for (double ratio : res.ratios)
        worst_ratio = std::max(worst_ratio, std::abs(ratio - res.amplification));
      for (double e : res.projector_residuals)
        worst_residual = std::max(worst_residual, e);
      const double floor = 0.5 * eps * scale * std::pow(1.02, static_cast<double>(K));
      ok = ok && res.final_gap_w >= floor;
      gaps += " K=" + std::to_string(K) + ":" + fmt(res.final_gap_w / floor);
      fp.add(res.final_gap_w);
      fp.add(res.final_gap_ag);
      fp.add(setup.delta);
    }
    ok = ok && worst_ratio <= tolerance::amplification &&
         worst_residual <= tolerance::projector_map;
    r.status = ok ? CheckStatus::pass : CheckStatus::fail;
    r.detail = "max|ratio-1.024|=" + fmt(worst_ratio) + " max projector residual=" +
               fmt(worst_residual) + " gap/floor" + gaps;
    r.fingerprint = fp.hex();
  });
}

CheckResult check_gradients(Index points) {
  return timed("gradients", [&](CheckResult &r) {
    Fingerprint fp;
    Draws draws(77);
    const Index d = 6;
    Vector spectrum(d), shift = draws.gaussian(d);
    spectrum << 0.01, 0.1, 0.5, 1.0, 2.0, 4.0;
    auto quad = std::make_shared<const Objective>(make_quadratic(spectrum, shift, 0.5));
    auto data = std::make_shared<const Dataset>(make_synthetic_binary(200, d, 3, 5));
    auto logistic = std::make_shared<const Objective>(make_logistic(data, 1e-2));
    const Objective augmented = augment(*logistic, 0.3, draws.gaussian(d));
    const Objective aug_quad = augment(*quad, 0.1, draws.gaussian(d));

    const std::pair<const char *, const Objective *> kinds[] = {
        {"quadratic", quad.get()},
        {"logistic", logistic.get()},
        {"augmented-logistic", &augmented},
        {"augmented-quadratic", &aug_quad}};
    double worst = 0.0;
    std::string per_kind;
    for (const auto &[name, obj] : kinds) {
      double kind_worst = 0.0;
      for (Index p = 0; p < points; ++p) {
        const Vector w = 2.0 * draws.gaussian(d);
        const Vector g = grad(*obj, w);
        for (Index i = 0; i < d; ++i) {
          const double h = 1e-6 * (1.0 + std::abs(w[i]));
          Vector up = w, down = w;
          up[i] += h;
          down[i] -= h;
          const double fd = (eval(*obj, up) - eval(*obj, down)) / (up[i] - down[i]);
          kind_worst = std::max(kind_worst, std::abs(fd - g[i]) / std::max(std::abs(g[i]), 1.0));
        }
        fp.add(g);
      }
      per_kind += std::string(" ") + name + "=" + fmt(kind_worst);
      worst = std::max(worst, kind_worst);
    }
    r.status = worst <= tolerance::gradient ? CheckStatus::pass : CheckStatus::fail;
    r.detail = std::to_string(points) + " points per kind, max rel err" + per_kind;
    r.fingerprint = fp.hex();
  });
}

std::filesystem::path default_data_dir() {
  if (const char *env = std::getenv("FEDAC_DATA_DIR"); env != nullptr && *env != '\0')
    return env;
  return "data";
}

std::filesystem::path find_dataset(const std::filesystem::path &dir, const std::string &stem) {
  for (const char *suffix : {"", ".txt", ".gz"}) {
    const auto p = dir / (stem + suffix);
    std::error_code ec;
    if (std::filesystem::is_regular_file(p, ec))
      return p;
  }
  return {};
}

CheckResult check_dataset_shapes(const std::filesystem::path &data_dir) {
  return timed("dataset-shapes", [&](CheckResult &r) {
    const auto a9a = find_dataset(data_dir, "a9a");
    if (a9a.empty()) {
      r.status = CheckStatus::skip;
      r.detail = "a9a not found under " + data_dir.string() + " (set FEDAC_DATA_DIR)";
      return;
    }
    Fingerprint fp;
    const DatasetStats s = dataset_stats(load_libsvm(a9a, 123));
    bool ok = s.n == 32561 && s.dim == 123;
    r.detail = "a9a n=" + std::to_string(s.n) + " dim=" + std::to_string(s.dim);
    fp.add(s.mean_row_norm_sq);
    const auto eps = find_dataset(data_dir, "epsilon_normalized");
    if (!eps.empty()) {
      const DatasetStats e = dataset_stats(load_libsvm(eps, 2000));
      ok = ok && e.n == 400000 && e.dim == 2000;
      r.detail += " epsilon n=" + std::to_string(e.n) + " dim=" + std::to_string(e.dim);
      fp.add(e.mean_row_norm_sq);
    } else {
      r.detail += " (epsilon absent)";
    }
    r.status = ok ? CheckStatus::pass : CheckStatus::fail;
    r.fingerprint = fp.hex();
  });
}

CheckResult check_speedup_ordering(const std::filesystem::path &data_dir, int threads,
                                   const std::filesystem::path &cache_dir) {
  return timed("speedup-ordering", [&](CheckResult &r) {
    const auto a9a = find_dataset(data_dir, "a9a");
    if (a9a.empty()) {
      r.status = CheckStatus::skip;
      r.detail = "a9a not found under " + data_dir.string() + " (set FEDAC_DATA_DIR)";
      return;
    }
    ExperimentConfig cfg;
    cfg.objective = "logistic";
    cfg.data = a9a;
    cfg.dim = 123;
    cfg.lambda = 1e-3;
    cfg.algorithms = {Algorithm::fedac1, Algorithm::fedavg, Algorithm::mb_sgd,
                      Algorithm::mb_acsgd};
    cfg.T = 1024;
    cfg.eval_every = 128;
    cfg.M = {1, 4, 16, 64};
    cfg.K = {1, 16, 64};
    cfg.eta = default_eta_grid();
    cfg.seeds = {1, 2, 3};
    cfg.threads = threads;
    const Problem problem = build_problem(cfg, cache_dir);
    const SweepResult sweep = tune_and_sweep(problem, cfg);

    const auto best = [&](Algorithm a, Index M, Index K) {
      for (const auto &row : sweep.rows)
        if (row.algorithm == a && row.M == M && row.K == K)
          return row.best_suboptimality;
      throw std::logic_error("missing sweep row");
    };
    const double fedac = best(Algorithm::fedac1, 64, 64);
    const double avg = best(Algorithm::fedavg, 64, 64);
    const double mb = best(Algorithm::mb_sgd, 64, 64);
    bool ok = fedac <= avg && fedac <= mb;
    double spread = 0.0;
    for (Index M : cfg.M) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (Algorithm a : cfg.algorithms) {
        lo = std::min(lo, best(a, M, 1));
        hi = std::max(hi, best(a, M, 1));
      }
      spread = std::max(spread, hi / lo);
    }
    ok = ok && spread <= tolerance::baseline_spread;
    r.status = ok ? CheckStatus::pass : CheckStatus::fail;
    r.detail = "K=M=64: fedac1=" + fmt(fedac) + " fedavg=" + fmt(avg) + " mb_sgd=" + fmt(mb) +
               "; K=1 max ratio across algorithms=" + fmt(spread);
    Fingerprint fp;
    fp.add(sweep_csv(sweep.rows));
    const auto records = flatten_records(sweep.cells);
    fp.add(records_csv(records));
    r.fingerprint = fp.hex();
  });
}

std::vector<CheckResult> run_core_checks(int threads) {
  return {check_equivalences(threads), check_norm_bounds(), check_potential_contraction(),
          check_instability(), check_gradients()};
}

} // namespace fedac
