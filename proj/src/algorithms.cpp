#include "fedac/algorithms.hpp"

#include <algorithm>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "fedac/error.hpp"
#include "fedac/parallel.hpp"
#include "fedac/reduce.hpp"

namespace fedac {

namespace {

void check_run_shape(Index M, Index T, Index K) {
  if (M < 1 || T < 1 || K < 1)
    throw std::invalid_argument("run: M, T and K must be at least 1");
}

Vector start_point(const RunOptions &options, Index dim) {
  if (options.w0.size() == 0)
    return Vector::Zero(dim);
  if (options.w0.size() != dim)
    throw std::invalid_argument("run: starting point has dimension " +
                                std::to_string(options.w0.size()) + ", expected " +
                                std::to_string(dim));
  return options.w0;
}

std::unique_ptr<ThreadPool> make_pool(int threads, Index parallel_items) {
  const auto usable = static_cast<int>(std::min<Index>(std::max(threads, 1), parallel_items));
  return std::make_unique<ThreadPool>(std::max(usable, 1));
}

/// Emits evaluation records on the parallel-time axis. A run of `steps`
/// steps, each worth `time_per_step` gradient queries per worker, spans
/// parallel time [0, steps * time_per_step]; the state after s steps stands
/// for every time in [s * time_per_step, (s + 1) * time_per_step).
class EvalTimeline {
public:
  EvalTimeline(const RunOptions &options, Index steps, Index time_per_step)
      : options_(options), total_(steps * time_per_step), per_step_(time_per_step) {}

  template <typename PointFn>
  void after(Index steps_done, PointFn &&point, std::vector<EvalRecord> &out) {
    if (!options_.evaluate || options_.eval_every <= 0)
      return;
    const Index limit = steps_done * per_step_ == total_
                            ? total_
                            : (steps_done + 1) * per_step_ - 1;
    std::optional<double> value;
    while (next_ <= limit && next_ <= total_) {
      if (!value)
        value = options_.evaluate(point());
      out.push_back({next_, *value});
      if (options_.on_record)
        options_.on_record(out.back());
      next_ += options_.eval_every;
    }
  }

private:
  const RunOptions &options_;
  Index total_;
  Index per_step_;
  Index next_ = 0;
};

Vector mean_w(const std::vector<WorkerState> &workers) {
  return pairwise_mean(static_cast<Index>(workers.size()),
                       [&](Index m) -> const Vector & { return workers[m].w; });
}

Vector mean_w_ag(const std::vector<WorkerState> &workers) {
  return pairwise_mean(static_cast<Index>(workers.size()),
                       [&](Index m) -> const Vector & { return workers[m].w_ag; });
}

void throw_first_divergence(const std::vector<char> &finite, Index t) {
  for (std::size_t m = 0; m < finite.size(); ++m)
    if (!finite[m])
      throw DivergenceError(t, static_cast<Index>(m));
}

RunResult fedac_core(std::vector<GradientSampler> &samplers, Index dim, Index T,
                     Index K, const Hyper &hyper, const RunOptions &options,
                     Index time_per_step) {
  const auto M = static_cast<Index>(samplers.size());
  check_run_shape(M, T, K);
  validate(hyper);
  const Vector w0 = start_point(options, dim);

  std::vector<WorkerState> workers(static_cast<std::size_t>(M), WorkerState{w0, w0});
  std::vector<char> finite(static_cast<std::size_t>(M), 1);
  auto pool = make_pool(options.threads, M);
  EvalTimeline timeline(options, T, time_per_step);
  RunResult result;

  const double inv_beta = 1.0 / hyper.beta;
  const double inv_alpha = 1.0 / hyper.alpha;

  if (options.observer)
    options.observer(0, workers);
  timeline.after(0, [&] { return mean_w_ag(workers); }, result.eval_records);

  for (Index t = 0; t < T; ++t) {
    pool->parallel_for(M, [&](Index m) {
      WorkerState &s = workers[static_cast<std::size_t>(m)];
      const Vector md = inv_beta * s.w + (1.0 - inv_beta) * s.w_ag;
      const Vector g = samplers[static_cast<std::size_t>(m)](md);
      s.w = (1.0 - inv_alpha) * s.w + inv_alpha * md - hyper.gamma * g;
      s.w_ag = md - hyper.eta * g;
      finite[static_cast<std::size_t>(m)] = s.w.allFinite() && s.w_ag.allFinite();
    });
    throw_first_divergence(finite, t);

    if ((t + 1) % K == 0) {
      const Vector avg = mean_w(workers);
      const Vector avg_ag = mean_w_ag(workers);
      for (auto &s : workers) {
        s.w = avg;
        s.w_ag = avg_ag;
      }
    }
    if (options.observer)
      options.observer(t + 1, workers);
    timeline.after(t + 1, [&] { return mean_w_ag(workers); }, result.eval_records);
  }

  result.final_avg_w = mean_w(workers);
  result.final_avg_w_ag = mean_w_ag(workers);
  result.gradient_calls = M * T;
  return result;
}

} // namespace

GradientSampler make_sampler(const Objective &obj, RngStream stream) {
  return [&obj, stream](const Vector &w) mutable { return stoch_grad(obj, w, stream); };
}

GradientSampler make_batched_sampler(const Objective &obj, std::uint64_t seed,
                                     Index batch) {
  if (batch < 1)
    throw std::invalid_argument("make_batched_sampler: batch must be positive");
  std::vector<RngStream> streams;
  streams.reserve(static_cast<std::size_t>(batch));
  for (Index j = 0; j < batch; ++j)
    streams.push_back(make_stream(seed, j));
  return [&obj, streams = std::move(streams)](const Vector &w) mutable {
    return pairwise_mean(static_cast<Index>(streams.size()), [&](Index j) {
      return stoch_grad(obj, w, streams[static_cast<std::size_t>(j)]);
    });
  };
}

RunResult fedac_run(const Objective &obj, Index M, Index T, Index K,
                    const Hyper &hyper, std::uint64_t seed,
                    const RunOptions &options) {
  check_run_shape(M, T, K);
  std::vector<GradientSampler> samplers;
  samplers.reserve(static_cast<std::size_t>(M));
  for (Index m = 0; m < M; ++m)
    samplers.push_back(make_sampler(obj, make_stream(seed, m)));
  return fedac_core(samplers, obj.dim(), T, K, hyper, options, 1);
}

RunResult fedac_run(std::vector<GradientSampler> samplers, Index dim, Index T,
                    Index K, const Hyper &hyper, const RunOptions &options) {
  return fedac_core(samplers, dim, T, K, hyper, options, 1);
}

RunResult fedavg_run(const Objective &obj, Index M, Index T, Index K,
                     double eta, std::uint64_t seed, const RunOptions &options) {
  check_run_shape(M, T, K);
  if (!(eta > 0))
    throw std::invalid_argument("fedavg_run: eta must be positive");
  const Vector w0 = start_point(options, obj.dim());

  std::vector<WorkerState> workers(static_cast<std::size_t>(M), WorkerState{w0, Vector()});
  std::vector<RngStream> streams;
  for (Index m = 0; m < M; ++m)
    streams.push_back(make_stream(seed, m));
  std::vector<char> finite(static_cast<std::size_t>(M), 1);
  auto pool = make_pool(options.threads, M);
  EvalTimeline timeline(options, T, 1);
  RunResult result;

  // Running rho-weighted sum: acc <- q acc + avg(w_t), q = 1 - eta mu / 2.
  // q is clamped at 0, which keeps only the last average when eta mu >= 2.
  const double q = std::max(0.0, 1.0 - 0.5 * eta * obj.mu_est());
  Vector weighted = Vector::Zero(obj.dim());
  double weight_total = 0.0;

  if (options.observer)
    options.observer(0, workers);
  Vector avg = w0;
  timeline.after(0, [&] { return avg; }, result.eval_records);

  for (Index t = 0; t < T; ++t) {
    weighted = q * weighted + avg;
    weight_total = q * weight_total + 1.0;

    pool->parallel_for(M, [&](Index m) {
      const auto i = static_cast<std::size_t>(m);
      WorkerState &s = workers[i];
      s.w = s.w - eta * stoch_grad(obj, s.w, streams[i]);
      finite[i] = s.w.allFinite();
    });
    throw_first_divergence(finite, t);

    avg = mean_w(workers);
    if ((t + 1) % K == 0)
      for (auto &s : workers)
        s.w = avg;
    if (options.observer)
      options.observer(t + 1, workers);
    timeline.after(t + 1, [&] { return avg; }, result.eval_records);
  }

  result.final_avg_w = avg;
  result.final_avg_w_ag = avg;
  result.weighted_avg_w = weighted / weight_total;
  result.gradient_calls = M * T;
  return result;
}

RunResult mb_sgd_run(const Objective &obj, Index M, Index T, Index K,
                     double eta, std::uint64_t seed, const RunOptions &options) {
  check_run_shape(M, T, K);
  if (T % K != 0)
    throw std::invalid_argument("mb_sgd_run: K must divide T");
  if (!(eta > 0))
    throw std::invalid_argument("mb_sgd_run: eta must be positive");
  const Index batch = M * K;
  const Index rounds = T / K;

  std::vector<RngStream> streams;
  for (Index j = 0; j < batch; ++j)
    streams.push_back(make_stream(seed, j));
  std::vector<Vector> candidates(static_cast<std::size_t>(batch));
  std::vector<char> finite(static_cast<std::size_t>(batch), 1);
  auto pool = make_pool(options.threads, batch);
  EvalTimeline timeline(options, rounds, K);
  RunResult result;

  std::vector<WorkerState> chain{WorkerState{start_point(options, obj.dim()), Vector()}};
  Vector &w = chain.front().w;
  if (options.observer)
    options.observer(0, chain);
  timeline.after(0, [&] { return w; }, result.eval_records);

  for (Index r = 0; r < rounds; ++r) {
    // Same candidate-then-average arithmetic as a synchronized local SGD step.
    pool->parallel_for(batch, [&](Index j) {
      const auto i = static_cast<std::size_t>(j);
      candidates[i] = w - eta * stoch_grad(obj, w, streams[i]);
      finite[i] = candidates[i].allFinite();
    });
    throw_first_divergence(finite, r);
    w = pairwise_mean(batch, [&](Index j) -> const Vector & {
      return candidates[static_cast<std::size_t>(j)];
    });
    if (options.observer)
      options.observer(r + 1, chain);
    timeline.after(r + 1, [&] { return w; }, result.eval_records);
  }

  result.final_avg_w = w;
  result.final_avg_w_ag = w;
  result.gradient_calls = T;
  return result;
}

RunResult mb_acsgd_run(const Objective &obj, Index M, Index T, Index K,
                       double eta, std::uint64_t seed, const RunOptions &options) {
  check_run_shape(M, T, K);
  if (T % K != 0)
    throw std::invalid_argument("mb_acsgd_run: K must divide T");
  if (!(obj.mu_est() > 0))
    throw std::invalid_argument("mb_acsgd_run: needs mu_est > 0");
  const Hyper hyper = schedule_vanilla(eta, obj.mu_est());
  std::vector<GradientSampler> samplers{make_batched_sampler(obj, seed, M * K)};
  RunResult result = fedac_core(samplers, obj.dim(), T / K, 1, hyper, options, K);
  result.gradient_calls = T;
  return result;
}

AgdTrajectory<Vector> agd_run(const Objective &obj, const Vector &w0_ag,
                              const Vector &w0, double L, double mu, Index steps) {
  if (!(mu > 0) || !(L >= mu))
    throw std::invalid_argument("agd_run: need 0 < mu <= L");
  if (w0.size() != obj.dim() || w0_ag.size() != obj.dim())
    throw std::invalid_argument("agd_run: dimension mismatch");
  return agd_trajectory<Vector>([&](const Vector &x) { return grad(obj, x); }, w0_ag,
                                w0, L, mu, steps);
}

} // namespace fedac
