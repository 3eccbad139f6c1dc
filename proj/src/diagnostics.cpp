#include "fedac/diagnostics.hpp"

#include <algorithm>
#include <string>

#include "fedac/reduce.hpp"

namespace fedac {

namespace {

void check_workers(std::span<const WorkerState> workers) {
  if (workers.empty())
    throw std::invalid_argument("potential: no workers");
}

Vector average(std::span<const WorkerState> workers, Vector WorkerState::*member) {
  return pairwise_mean(static_cast<Index>(workers.size()),
                       [&](Index m) -> const Vector & { return workers[static_cast<std::size_t>(m)].*member; });
}

} // namespace

double potential_psi(std::span<const WorkerState> workers, const Objective &obj,
                     double mu, const Vector &w_star, double f_star) {
  check_workers(workers);
  double f_sum = 0.0;
  for (const auto &s : workers)
    f_sum += eval(obj, s.w_ag);
  const Vector w_bar = average(workers, &WorkerState::w);
  return f_sum / static_cast<double>(workers.size()) - f_star +
         0.5 * mu * (w_bar - w_star).squaredNorm();
}

double potential_phi(std::span<const WorkerState> workers, const Objective &obj,
                     double mu, const Vector &w_star, double f_star) {
  check_workers(workers);
  const Vector w_bar = average(workers, &WorkerState::w);
  const Vector w_ag_bar = average(workers, &WorkerState::w_ag);
  return eval(obj, w_ag_bar) - f_star + mu / 6.0 * (w_bar - w_star).squaredNorm();
}

PotentialReport potential_report(std::span<const WorkerState> workers,
                                 const Objective &obj, double mu,
                                 const Vector &w_star, double f_star) {
  PotentialReport report;
  report.psi = potential_psi(workers, obj, mu, w_star, f_star);
  report.phi = potential_phi(workers, obj, mu, w_star, f_star);
  const Vector w_bar = average(workers, &WorkerState::w);
  for (const auto &s : workers) {
    const double sq = (w_bar - s.w).squaredNorm();
    report.discrepancy_max = std::max(report.discrepancy_max, std::sqrt(sq));
    report.discrepancy_mean_sq += sq;
  }
  report.discrepancy_mean_sq /= static_cast<double>(workers.size());
  return report;
}

double transformed_norm_bound(StabilitySchedule schedule, double mu,
                              double gamma, double eta) {
  if (gamma == eta)
    return 1.0;
  const double excess = gamma * gamma * mu / eta;
  return schedule == StabilitySchedule::fedac1 ? 1.0 + 2.0 * excess : 1.0 + excess;
}

std::vector<double> curvature_samples(double mu, double L, Index h_samples) {
  if (h_samples < 2)
    throw std::invalid_argument("curvature_samples: need at least 2 samples");
  std::vector<double> hs(static_cast<std::size_t>(h_samples));
  for (Index i = 0; i < h_samples; ++i)
    hs[static_cast<std::size_t>(i)] =
        mu + (L - mu) * static_cast<double>(i) / static_cast<double>(h_samples - 1);
  hs.back() = L;
  return hs;
}

NormBoundReport norm_bound_sweep(double mu, double L,
                                 std::span<const NormBoundPoint> grid,
                                 Index h_samples, double tolerance) {
  if (!(mu > 0) || !(L >= mu))
    throw std::invalid_argument("norm_bound_sweep: need 0 < mu <= L");
  const std::vector<double> hs = curvature_samples(mu, L, h_samples);
  NormBoundReport report;
  for (const auto &p : grid) {
    if (!(p.eta > 0) || p.eta > 1.0 / L)
      throw std::invalid_argument("norm_bound_sweep: eta outside (0, 1/L]");
    if (p.gamma < p.eta || p.gamma > std::sqrt(p.eta / mu))
      throw std::invalid_argument("norm_bound_sweep: gamma outside [eta, sqrt(eta/mu)]");
    for (const auto schedule : {StabilitySchedule::fedac1, StabilitySchedule::fedac2}) {
      NormBoundRow row{schedule, p.gamma, p.eta, 0.0, mu, 0.0, false};
      for (const double H : hs) {
        const Matrix2<double> A = schedule == StabilitySchedule::fedac1
                                      ? transfer_matrix_fedac1(mu, p.gamma, p.eta, H, L)
                                      : transfer_matrix_fedac2(mu, p.gamma, p.eta, H, L);
        const double norm = transformed_norm(A, p.gamma, p.eta);
        if (norm > row.max_norm) {
          row.max_norm = norm;
          row.argmax_H = H;
        }
      }
      row.bound = transformed_norm_bound(schedule, mu, p.gamma, p.eta);
      row.violated = row.max_norm > row.bound + tolerance;
      report.max_excess = std::max(report.max_excess, row.max_norm - row.bound);
      report.violations += row.violated ? 1 : 0;
      report.rows.push_back(row);
    }
  }
  return report;
}

const char *to_string(StabilitySchedule schedule) noexcept {
  return schedule == StabilitySchedule::fedac1 ? "fedac1" : "fedac2";
}

} // namespace fedac
