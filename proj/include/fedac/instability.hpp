#pragma once

#include <vector>

#include "fedac/algorithms.hpp"
#include "fedac/types.hpp"

namespace fedac {

/// Closed interval [center - half_width, center + half_width] of curvature L.
struct CurvatureBump {
  double center = 0.0;
  double half_width = 0.0;

  double lo() const noexcept { return center - half_width; }
  double hi() const noexcept { return center + half_width; }
};

/// One-dimensional objective F(w) = int_0^w int_0^y H(x) dx dy where H equals
/// L on a set of disjoint closed bumps and base_mu elsewhere. F' is continuous,
/// F'' piecewise constant, F is base_mu-strongly convex and L-smooth.
struct PiecewiseCurvature1D {
  double base_mu = 1.0;
  double L = 1.0;
  std::vector<CurvatureBump> bumps;

  double curvature(double w) const noexcept;
  double derivative(double w) const noexcept;
  double value(double w) const noexcept;

  /// int_{x - delta}^{x} H. Exact when the interval avoids bump boundaries,
  /// so the gradient difference of two nearby points carries no cancellation.
  double curvature_integral(double x, double delta) const noexcept;

  /// Distance from w to the nearest bump edge (infinity without bumps).
  double clearance(double w) const noexcept;
  bool in_bump(double w) const noexcept;
};

struct InstabilityObjective {
  PiecewiseCurvature1D objective;
  double w0 = 1.0;
  double w0_ag = 1.0;
  /// Every query point w_md_t of AGD from (w0_ag, w0) sees constant curvature
  /// on [w_md_t - delta, w_md_t + delta]: L when t mod 3 == 1, mu otherwise.
  double delta = 0.0;
  AgdTrajectory<double> trajectory;
  /// Bump half-widths chosen at each induction step.
  std::vector<double> bump_half_widths;
};

/// Builds the objective inductively: for k = 0..K-1 a bump is placed around
/// w_md_{3k+1} (every bump is then re-centred on its query point), halving its half-width
/// by `eps_shrink` until the trajectory moves less than a quarter of the
/// minimum query-point spacing and every curvature condition holds with a
/// positive margin. Throws Error(numerical) after 60 halvings.
/// Requires L/mu >= 25 and K >= 0.
InstabilityObjective construct_instability_objective(double L, double mu,
                                                     Index K,
                                                     double eps_shrink = 0.5,
                                                     double w0 = 1.0,
                                                     double w0_ag = 1.0);

struct InstabilityResult {
  /// |gap_{3k+3}| / |P gap_{3k}| per block, P the block projector.
  std::vector<double> ratios;
  /// Relative deviation of gap_{3k+3} from -2(1 - 1/sqrt(kappa))^3 P gap_{3k}.
  std::vector<double> projector_residuals;
  /// (w_ag - u_ag, w - u) at t = 0, 3, ..., 3K.
  std::vector<Vector2<double>> block_gaps;
  double final_gap_w = 0.0;
  double final_gap_ag = 0.0;
  /// Closed-form values eps/2 * (2(1-1/sqrt(kappa))^3)^K * (sqrt(kappa)+1) and
  /// eps/2 * (...)^K * (1 + 1/sqrt(kappa)).
  double predicted_gap_w = 0.0;
  double predicted_gap_ag = 0.0;
  double amplification = 0.0; // 2(1 - 1/sqrt(kappa))^3
};

/// -2(1 - 1/sqrt(kappa))^3 * [[1/2, 1/(2 sqrt kappa)], [sqrt(kappa)/2, 1/2]].
Matrix2<double> instability_block_map(double kappa);

/// Runs AGD from (w0_ag, w0) and from (w0_ag - eps, w0 - eps) for 3K steps.
/// The second run is advanced in difference coordinates: its gradient is
/// F'(w_md) minus the integral of F'' over the gap. Throws Error(numerical)
/// naming the step if a query point of the second run leaves the delta
/// neighbourhood.
InstabilityResult instability_experiment(const InstabilityObjective &setup,
                                         double eps, Index K);

} // namespace fedac
