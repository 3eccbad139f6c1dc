#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fedac/objective.hpp"
#include "fedac/schedule.hpp"
#include "fedac/types.hpp"

namespace fedac {

/// Per-worker iterates. FedAvg and minibatch SGD only use `w`.
struct WorkerState {
  Vector w;
  Vector w_ag;
};

/// Value returned by the evaluation callback at parallel time t.
struct EvalRecord {
  Index t = 0;
  double suboptimality = 0.0;

  friend bool operator==(const EvalRecord &, const EvalRecord &) = default;
};

struct RunOptions {
  /// Common starting point for every worker; empty means the origin.
  Vector w0;
  /// Evaluate at t = 0, eval_every, 2 eval_every, ..., T. Zero disables.
  /// Evaluation never touches the random streams.
  Index eval_every = 0;
  std::function<double(const Vector &)> evaluate;
  /// Receives each record as it is produced, so records before a
  /// DivergenceError are not lost.
  std::function<void(const EvalRecord &)> on_record;
  /// Called with all worker states at t = 0 and after every step.
  std::function<void(Index t, std::span<const WorkerState>)> observer;
  /// Workers updated concurrently on this many threads. Results are
  /// bitwise independent of the value.
  int threads = 1;
};

struct RunResult {
  Vector final_avg_w;
  Vector final_avg_w_ag;
  std::vector<EvalRecord> eval_records;
  /// FedAc/FedAvg: M*T oracle calls. Minibatch baselines: T, the per-worker
  /// gradient budget of T/K steps at batch M*K.
  Index gradient_calls = 0;
  /// FedAvg only: sum_t rho_t avg(w_t) / sum_t rho_t, rho_t = (1 - eta mu/2)^(T-t-1).
  Vector weighted_avg_w;
};

/// Stateful stochastic gradient source for one worker; owns its streams.
using GradientSampler = std::function<Vector(const Vector &w)>;

/// Draws stoch_grad(obj, w, stream) on each call.
GradientSampler make_sampler(const Objective &obj, RngStream stream);

/// Averages one stoch_grad from each of the streams (seed, 0..batch-1) per
/// call, in the canonical pairwise order.
GradientSampler make_batched_sampler(const Objective &obj, std::uint64_t seed,
                                     Index batch);

/// Federated accelerated SGD on M workers; worker m samples stream (seed, m).
/// Averages and broadcasts both iterate families after every step t with
/// (t + 1) mod K == 0. Throws DivergenceError on a non-finite iterate.
RunResult fedac_run(const Objective &obj, Index M, Index T, Index K,
                    const Hyper &hyper, std::uint64_t seed,
                    const RunOptions &options = {});

/// Same loop with caller-supplied samplers, one per worker.
RunResult fedac_run(std::vector<GradientSampler> samplers, Index dim, Index T,
                    Index K, const Hyper &hyper, const RunOptions &options = {});

/// Federated averaging (local SGD) with the same synchronization rule.
RunResult fedavg_run(const Objective &obj, Index M, Index T, Index K,
                     double eta, std::uint64_t seed,
                     const RunOptions &options = {});

/// T/K steps of SGD, each averaging M*K stochastic gradients from streams
/// (seed, 0..MK-1). Requires K | T.
RunResult mb_sgd_run(const Objective &obj, Index M, Index T, Index K,
                     double eta, std::uint64_t seed,
                     const RunOptions &options = {});

/// T/K steps of accelerated SGD with batch M*K and schedule_vanilla(eta, mu_est):
/// fedac_run with one worker, K = 1 and make_batched_sampler(obj, seed, M*K).
RunResult mb_acsgd_run(const Objective &obj, Index M, Index T, Index K,
                       double eta, std::uint64_t seed,
                       const RunOptions &options = {});

/// Coefficients of deterministic Nesterov AGD with kappa = L/mu.
struct AgdStep {
  double L;
  double mu;

  double sqrt_kappa() const { return std::sqrt(L / mu); }

  template <typename State>
  State mid(const State &w_ag, const State &w) const {
    const double sk = sqrt_kappa();
    return State(w / (sk + 1.0) + (sk / (sk + 1.0)) * w_ag);
  }
  template <typename State>
  State next_ag(const State &w_md, const State &g) const {
    return State(w_md - g / L);
  }
  template <typename State>
  State next_w(const State &w, const State &w_md, const State &g) const {
    const double sk = sqrt_kappa();
    return State((1.0 - 1.0 / sk) * w + w_md / sk - std::sqrt(1.0 / (L * mu)) * g);
  }
};

template <typename State> struct AgdTrajectory {
  std::vector<State> w_ag; // steps + 1 entries
  std::vector<State> w_md; // steps entries
  std::vector<State> w;    // steps + 1 entries
};

/// Runs `steps` iterations of AGD with exact gradients from `gradient`.
template <typename State, typename GradFn>
AgdTrajectory<State> agd_trajectory(GradFn &&gradient, State w0_ag, State w0,
                                    double L, double mu, Index steps) {
  const AgdStep step{L, mu};
  AgdTrajectory<State> traj;
  traj.w_ag.reserve(steps + 1);
  traj.w.reserve(steps + 1);
  traj.w_md.reserve(steps);
  traj.w_ag.push_back(std::move(w0_ag));
  traj.w.push_back(std::move(w0));
  for (Index t = 0; t < steps; ++t) {
    State md = step.mid(traj.w_ag.back(), traj.w.back());
    const State g = gradient(md);
    traj.w_ag.push_back(step.next_ag(md, g));
    traj.w.push_back(step.next_w(traj.w[t], md, g));
    traj.w_md.push_back(std::move(md));
  }
  return traj;
}

/// AGD on an objective's exact gradient. Requires mu > 0.
AgdTrajectory<Vector> agd_run(const Objective &obj, const Vector &w0_ag,
                              const Vector &w0, double L, double mu, Index steps);

} // namespace fedac
