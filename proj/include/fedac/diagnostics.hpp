#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "fedac/algorithms.hpp"
#include "fedac/objective.hpp"
#include "fedac/types.hpp"

namespace fedac {

/// Progress measures over a set of worker states.
struct PotentialReport {
  double psi = 0.0;                 // decentralized
  double phi = 0.0;                 // centralized
  double discrepancy_max = 0.0;     // max_m ||avg(w) - w^m||
  double discrepancy_mean_sq = 0.0; // 1/M sum_m ||avg(w) - w^m||^2
};

/// Psi = 1/M sum_m F(w_ag^m) - F* + mu/2 ||avg(w) - w*||^2.
double potential_psi(std::span<const WorkerState> workers, const Objective &obj,
                     double mu, const Vector &w_star, double f_star);

/// Phi = F(avg(w_ag)) - F* + mu/6 ||avg(w) - w*||^2.
double potential_phi(std::span<const WorkerState> workers, const Objective &obj,
                     double mu, const Vector &w_star, double f_star);

PotentialReport potential_report(std::span<const WorkerState> workers,
                                 const Objective &obj, double mu,
                                 const Vector &w_star, double f_star);

// ---------------------------------------------------------------------------
// Difference dynamics of two noise-free accelerated chains.
//
// For two workers running the same hyperparameters, the pair
// (w_ag^1 - w_ag^2, w^1 - w^2) advances over a local step by a 2x2 block map
// whose blocks are functions of the Hessian H at an intermediate point. The d
// blocks are simultaneously diagonalizable in H, so each eigen-direction
// reduces to the scalar-H matrices below.
// ---------------------------------------------------------------------------

/// Map for general (alpha, beta, gamma, eta).
template <typename Scalar>
Matrix2<Scalar> transfer_matrix_general(Scalar alpha, Scalar beta, Scalar gamma,
                                        Scalar eta, Scalar H) {
  const Scalar ib = Scalar(1) / beta;
  const Scalar ia = Scalar(1) / alpha;
  Matrix2<Scalar> A;
  A << (1 - ib) * (1 - eta * H), ib * (1 - eta * H),
      (1 - ib) * (ia - gamma * H), ib * (ia - gamma * H) + (1 - ia);
  return A;
}

namespace detail {
template <typename Scalar>
void check_curvature(Scalar mu, Scalar gamma, Scalar eta, Scalar H, Scalar L) {
  if (!(mu > 0) || !(gamma > 0) || !(eta > 0))
    throw std::invalid_argument("transfer matrix: mu, gamma, eta must be positive");
  if (H < mu || H > L)
    throw std::invalid_argument("transfer matrix: H outside [mu, L]");
}
} // namespace detail

/// FedAc-I (alpha = 1/(gamma mu), beta = alpha + 1):
/// 1/(1 + gamma mu) [[1 - eta H, gamma mu (1 - eta H)],
///                   [-gamma (H - mu), 1 - gamma^2 mu H]].
/// Pass L to enforce mu <= H <= L.
template <typename Scalar>
Matrix2<Scalar> transfer_matrix_fedac1(Scalar mu, Scalar gamma, Scalar eta,
                                       Scalar H,
                                       Scalar L = std::numeric_limits<Scalar>::infinity()) {
  detail::check_curvature(mu, gamma, eta, H, L);
  const Scalar gm = gamma * mu;
  Matrix2<Scalar> A;
  A << 1 - eta * H, gm * (1 - eta * H), -gamma * (H - mu), 1 - gamma * gamma * mu * H;
  return A / (1 + gm);
}

/// FedAc-II (alpha = 3/(2 gamma mu) - 1/2, beta = (2 alpha^2 - 1)/(alpha - 1)).
template <typename Scalar>
Matrix2<Scalar> transfer_matrix_fedac2(Scalar mu, Scalar gamma, Scalar eta,
                                       Scalar H,
                                       Scalar L = std::numeric_limits<Scalar>::infinity()) {
  detail::check_curvature(mu, gamma, eta, H, L);
  const Scalar gm = gamma * mu;
  Matrix2<Scalar> A;
  A << (3 - gm) * (3 - 2 * gm) * (1 - eta * H), 3 * gm * (1 - gm) * (1 - eta * H),
      (3 - 2 * gm) * (2 * gm - (3 - gm) * gamma * H),
      3 * (1 - gm) * ((3 - gm) - gamma * gamma * mu * H);
  return A / (9 - gm * (6 + gm));
}

/// Largest singular value of a 2x2 matrix in closed form:
/// (sqrt((a+d)^2 + (b-c)^2) + sqrt((a-d)^2 + (b+c)^2)) / 2.
template <typename Scalar> Scalar spectral_norm2(const Matrix2<Scalar> &A) {
  using std::hypot;
  const Scalar a = A(0, 0), b = A(0, 1), c = A(1, 0), d = A(1, 1);
  return (hypot(a + d, b - c) + hypot(a - d, b + c)) / 2;
}

/// X = [[eta/gamma, 0], [1, 1]].
template <typename Scalar>
Matrix2<Scalar> transformation_matrix(Scalar gamma, Scalar eta) {
  Matrix2<Scalar> X;
  X << eta / gamma, 0, 1, 1;
  return X;
}

/// || X^-1 A X ||_2 with X = transformation_matrix(gamma, eta).
template <typename Scalar>
Scalar transformed_norm(const Matrix2<Scalar> &A, Scalar gamma, Scalar eta) {
  if (!(gamma > 0) || !(eta > 0))
    throw std::invalid_argument("transformed_norm: gamma and eta must be positive");
  const Scalar r = gamma / eta;
  Matrix2<Scalar> X_inv;
  X_inv << r, 0, -r, 1;
  return spectral_norm2<Scalar>(X_inv * A * transformation_matrix(gamma, eta));
}

enum class StabilitySchedule { fedac1, fedac2 };

/// Uniform bound on the transformed norm over H in [mu, L]:
/// 1 when gamma == eta, else 1 + 2 gamma^2 mu / eta (FedAc-I) or
/// 1 + gamma^2 mu / eta (FedAc-II).
double transformed_norm_bound(StabilitySchedule schedule, double mu,
                              double gamma, double eta);

struct NormBoundPoint {
  double gamma = 0.0;
  double eta = 0.0;
};

struct NormBoundRow {
  StabilitySchedule schedule = StabilitySchedule::fedac1;
  double gamma = 0.0;
  double eta = 0.0;
  double max_norm = 0.0;
  double argmax_H = 0.0;
  double bound = 0.0;
  bool violated = false;
};

struct NormBoundReport {
  std::vector<NormBoundRow> rows;
  Index violations = 0;
  double max_excess = -std::numeric_limits<double>::infinity();
};

/// `h_samples` evenly spaced curvatures covering [mu, L] including both ends.
std::vector<double> curvature_samples(double mu, double L, Index h_samples);

/// Maximum transformed norm over the curvature samples for each grid point and
/// both schedules, flagged when it exceeds the bound by more than `tolerance`.
/// Requires eta <= 1/L and eta <= gamma <= sqrt(eta/mu) at every point.
NormBoundReport norm_bound_sweep(double mu, double L,
                                 std::span<const NormBoundPoint> grid,
                                 Index h_samples, double tolerance = 1e-9);

const char *to_string(StabilitySchedule schedule) noexcept;

} // namespace fedac
