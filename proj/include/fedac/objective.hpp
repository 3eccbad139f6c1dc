#pragma once

#include <memory>
#include <utility>
#include <variant>

#include "fedac/dataset.hpp"
#include "fedac/rng.hpp"
#include "fedac/types.hpp"

namespace fedac {

class Objective;

/// F(w) = 1/2 sum_j d_j (w_j - s_j)^2, with oracle noise z, E||z||^2 = sigma^2.
struct QuadraticObjective {
  Vector spectrum;
  Vector shift;
  double sigma = 0.0;
};

/// F(w) = 1/n sum_i log(1 + exp(-y_i <x_i, w>)) + lambda/2 ||w||^2.
struct LogisticObjective {
  std::shared_ptr<const Dataset> data;
  double lambda = 0.0;
};

/// F(w) = inner(w) + lambda/2 ||w - anchor||^2.
struct AugmentedObjective {
  std::shared_ptr<const Objective> inner;
  double lambda = 0.0;
  Vector anchor;
};

/// Immutable objective with deterministic and stochastic first-order oracles.
///
/// mu_est / l_est are the strong-convexity and smoothness constants handed to
/// hyperparameter schedules. The third-order smoothness constant used in some
/// convergence rates has no computational role and is not represented.
class Objective {
public:
  using Payload =
      std::variant<QuadraticObjective, LogisticObjective, AugmentedObjective>;

  Objective(Payload payload, Index dim, double mu_est, double l_est);

  Index dim() const noexcept { return dim_; }
  double mu_est() const noexcept { return mu_est_; }
  double l_est() const noexcept { return l_est_; }
  const Payload &payload() const noexcept { return payload_; }

private:
  Payload payload_;
  Index dim_;
  double mu_est_;
  double l_est_;
};

/// Quadratic with mu_est = min(spectrum), l_est = max(spectrum). Spectrum
/// entries must be nonnegative; an all-zero spectrum gives the zero objective.
Objective make_quadratic(Vector spectrum, Vector shift, double sigma = 0.0);
Objective make_zero_objective(Index dim);

/// l2-regularized logistic regression; (mu_est, l_est) from smoothness_bounds.
Objective make_logistic(std::shared_ptr<const Dataset> data, double lambda);

/// mu_est = lambda, l_est = 1/(4n) sum_i ||x_i||^2 + lambda.
std::pair<double, double> smoothness_bounds(const Dataset &ds, double lambda);

/// (lambda/2)||w - w0||^2 added to `obj`; lambda must be positive.
Objective augment(const Objective &obj, double lambda, const Vector &w0);

double eval(const Objective &obj, const ConstVectorRef &w);
Vector grad(const Objective &obj, const ConstVectorRef &w);

/// Unbiased stochastic gradient. Draw costs: quadratic consumes
/// draw_gaussian(dim), logistic consumes one draw_index(n), augmented
/// consumes whatever its inner objective does.
Vector stoch_grad(const Objective &obj, const ConstVectorRef &w,
                  RngStream &stream);

} // namespace fedac
