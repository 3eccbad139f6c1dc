#include "fedac/instability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fedac/error.hpp"

namespace fedac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxHalvings = 60;

// int_0^w clamp(y - a, 0, b - a) dy for w >= 0 and a bump [a, b] with a >= 0.
double ramp_integral(double a, double b, double w) {
  if (w <= a)
    return 0.0;
  if (w <= b)
    return 0.5 * (w - a) * (w - a);
  const double len = b - a;
  return 0.5 * len * len + len * (w - b);
}

// Contribution of one bump to int_0^w |[0, y] cap bump| dy, w >= 0.
double bump_area(double lo, double hi, double w) {
  if (hi <= 0.0)
    return 0.0;
  return ramp_integral(std::max(lo, 0.0), hi, w);
}

AgdTrajectory<double> run_agd(const PiecewiseCurvature1D &f, double w0_ag,
                              double w0, Index steps) {
  return agd_trajectory<double>([&](double x) { return f.derivative(x); }, w0_ag, w0,
                                f.L, f.base_mu, steps);
}

double min_spacing(std::vector<double> points) {
  if (points.size() < 2)
    return kInf;
  std::sort(points.begin(), points.end());
  double d = kInf;
  for (std::size_t i = 1; i < points.size(); ++i)
    d = std::min(d, points[i] - points[i - 1]);
  return d;
}

bool wants_high_curvature(Index t, Index placed) { return t % 3 == 1 && t < 3 * placed; }

/// Smallest distance from a query point to a region of the wrong curvature,
/// given `placed` bumps are expected so far; negative on any violation.
double curvature_margin(const PiecewiseCurvature1D &f, const std::vector<double> &md,
                        Index placed) {
  double margin = kInf;
  for (Index t = 0; t < static_cast<Index>(md.size()); ++t) {
    const double x = md[static_cast<std::size_t>(t)];
    if (f.in_bump(x) != wants_high_curvature(t, placed))
      return -1.0;
    const double c = f.clearance(x);
    if (!(c > 0))
      return -1.0;
    margin = std::min(margin, c);
  }
  return margin;
}

bool pairwise_disjoint(const std::vector<CurvatureBump> &bumps) {
  for (std::size_t i = 0; i < bumps.size(); ++i)
    for (std::size_t j = i + 1; j < bumps.size(); ++j)
      if (!(bumps[i].hi() < bumps[j].lo() || bumps[j].hi() < bumps[i].lo()))
        return false;
  return true;
}

/// Moves bump j onto w_md_{3j+1}, in order. Sliding a bump changes F' only
/// inside it, so w_md_{3j+1} depends on the centres of bumps 0..j-1 alone and
/// one forward pass reaches the fixed point.
AgdTrajectory<double> recenter(PiecewiseCurvature1D &f, double w0_ag, double w0, Index steps) {
  for (std::size_t j = 0; j < f.bumps.size(); ++j)
    f.bumps[j].center = run_agd(f, w0_ag, w0, steps).w_md[3 * j + 1];
  return run_agd(f, w0_ag, w0, steps);
}

} // namespace

bool PiecewiseCurvature1D::in_bump(double w) const noexcept {
  return std::any_of(bumps.begin(), bumps.end(),
                     [&](const CurvatureBump &b) { return b.lo() <= w && w <= b.hi(); });
}

double PiecewiseCurvature1D::curvature(double w) const noexcept {
  return in_bump(w) ? L : base_mu;
}

double PiecewiseCurvature1D::derivative(double w) const noexcept {
  const double lo = std::min(0.0, w), hi = std::max(0.0, w);
  double overlap = 0.0;
  for (const auto &b : bumps)
    overlap += std::max(0.0, std::min(hi, b.hi()) - std::max(lo, b.lo()));
  return base_mu * w + (L - base_mu) * (w >= 0 ? overlap : -overlap);
}

double PiecewiseCurvature1D::value(double w) const noexcept {
  const double u = std::abs(w);
  double area = 0.0;
  for (const auto &b : bumps)
    area += w >= 0 ? bump_area(b.lo(), b.hi(), u) : bump_area(-b.hi(), -b.lo(), u);
  return 0.5 * base_mu * w * w + (L - base_mu) * area;
}

double PiecewiseCurvature1D::curvature_integral(double x, double delta) const noexcept {
  if (delta == 0.0)
    return 0.0;
  const double lo = std::min(x - delta, x), hi = std::max(x - delta, x);
  double overlap = 0.0;
  for (const auto &b : bumps) {
    if (hi < b.lo() || b.hi() < lo)
      continue;
    if (b.lo() <= lo && hi <= b.hi())
      return L * delta; // wholly inside one bump
    overlap += std::min(hi, b.hi()) - std::max(lo, b.lo());
  }
  if (overlap == 0.0)
    return base_mu * delta;
  return base_mu * delta + (L - base_mu) * (delta > 0 ? overlap : -overlap);
}

double PiecewiseCurvature1D::clearance(double w) const noexcept {
  double c = kInf;
  for (const auto &b : bumps)
    c = std::min({c, std::abs(w - b.lo()), std::abs(w - b.hi())});
  return c;
}

InstabilityObjective construct_instability_objective(double L, double mu, Index K,
                                                     double eps_shrink, double w0,
                                                     double w0_ag) {
  if (!(mu > 0) || !(L / mu >= 25.0))
    throw std::invalid_argument("construct_instability_objective: need mu > 0 and L/mu >= 25");
  if (K < 0)
    throw std::invalid_argument("construct_instability_objective: K must be nonnegative");
  if (!(eps_shrink > 0 && eps_shrink < 1))
    throw std::invalid_argument("construct_instability_objective: eps_shrink must be in (0, 1)");

  const Index steps = 3 * K;
  InstabilityObjective out;
  out.objective = PiecewiseCurvature1D{mu, L, {}};
  out.w0 = w0;
  out.w0_ag = w0_ag;

  for (Index k = 0; k < K; ++k) {
    PiecewiseCurvature1D &f = out.objective;
    const AgdTrajectory<double> current = run_agd(f, w0_ag, w0, steps);
    const double spacing = min_spacing(current.w_md);
    if (!(spacing > 0))
      throw Error(ErrorKind::numerical,
                  "instability construction: query points coincide at stage " + std::to_string(k));

    double eps = 0.5 * spacing;
    bool placed = false;
    for (int halving = 0; halving <= kMaxHalvings && !placed; ++halving, eps *= eps_shrink) {
      PiecewiseCurvature1D candidate = f;
      candidate.bumps.push_back({current.w_md[static_cast<std::size_t>(3 * k + 1)], eps});
      const AgdTrajectory<double> next = recenter(candidate, w0_ag, w0, steps);
      if (!pairwise_disjoint(candidate.bumps))
        continue;

      double drift = 0.0;
      for (std::size_t t = 0; t < next.w_md.size(); ++t)
        drift = std::max(drift, std::abs(next.w_md[t] - current.w_md[t]));
      if (drift <= 0.25 * spacing && curvature_margin(candidate, next.w_md, k + 1) > 0) {
        f = std::move(candidate);
        out.bump_half_widths.push_back(eps);
        placed = true;
      }
    }
    if (!placed)
      throw Error(ErrorKind::numerical,
                  "instability construction: no bump width separates the query points at stage " +
                      std::to_string(k) + " after " + std::to_string(kMaxHalvings) + " halvings");
  }

  out.trajectory = run_agd(out.objective, w0_ag, w0, steps);
  const double margin = curvature_margin(out.objective, out.trajectory.w_md, K);
  if (!(margin > 0))
    throw Error(ErrorKind::numerical, "instability construction: final curvature check failed");
  out.delta = 0.5 * margin;
  return out;
}

Matrix2<double> instability_block_map(double kappa) {
  const double sk = std::sqrt(kappa);
  const double factor = -2.0 * std::pow(1.0 - 1.0 / sk, 3);
  Matrix2<double> P;
  P << 0.5, 0.5 / sk, 0.5 * sk, 0.5;
  return factor * P;
}

InstabilityResult instability_experiment(const InstabilityObjective &setup,
                                         double eps, Index K) {
  const PiecewiseCurvature1D &f = setup.objective;
  const auto &md = setup.trajectory.w_md;
  if (K < 0 || 3 * K > static_cast<Index>(md.size()))
    throw std::invalid_argument("instability_experiment: K exceeds the constructed horizon");
  if (!(eps >= 0) || !(eps < setup.delta))
    throw std::invalid_argument("instability_experiment: eps must lie in [0, delta)");

  const double kappa = f.L / f.base_mu;
  const double sk = std::sqrt(kappa);
  const AgdStep step{f.L, f.base_mu};
  const Matrix2<double> block = instability_block_map(kappa);
  Matrix2<double> P;
  P << 0.5, 0.5 / sk, 0.5 * sk, 0.5;

  InstabilityResult result;
  result.amplification = 2.0 * std::pow(1.0 - 1.0 / sk, 3);

  double gap_ag = eps, gap_w = eps;
  result.block_gaps.push_back({gap_ag, gap_w});
  for (Index t = 0; t < 3 * K; ++t) {
    const double x = md[static_cast<std::size_t>(t)];
    const double gap_md = step.mid(gap_ag, gap_w);
    if (std::abs(gap_md) > setup.delta)
      throw Error(ErrorKind::numerical,
                  "instability experiment: perturbed query point left the curvature "
                  "neighbourhood at step " + std::to_string(t));
    // F'(x) - F'(x - gap_md), integrated from the piecewise curvature.
    const double gap_g = f.curvature_integral(x, gap_md);
    const double next_ag = step.next_ag(gap_md, gap_g);
    gap_w = step.next_w(gap_w, gap_md, gap_g);
    gap_ag = next_ag;
    if ((t + 1) % 3 == 0)
      result.block_gaps.push_back({gap_ag, gap_w});
  }

  for (std::size_t k = 0; k + 1 < result.block_gaps.size(); ++k) {
    const Vector2<double> &before = result.block_gaps[k];
    const Vector2<double> &after = result.block_gaps[k + 1];
    const double projected = (P * before).norm();
    result.ratios.push_back(projected > 0 ? after.norm() / projected : 0.0);
    const double scale = after.norm();
    result.projector_residuals.push_back(scale > 0 ? (after - block * before).norm() / scale
                                                   : (block * before).norm());
  }

  result.final_gap_ag = std::abs(gap_ag);
  result.final_gap_w = std::abs(gap_w);
  const double grown = 0.5 * eps * std::pow(result.amplification, static_cast<double>(K));
  result.predicted_gap_w = grown * (sk + 1.0);
  result.predicted_gap_ag = grown * (1.0 + 1.0 / sk);
  return result;
}

} // namespace fedac
