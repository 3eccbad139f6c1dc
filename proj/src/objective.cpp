#include "fedac/objective.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fedac/error.hpp"

namespace fedac {

namespace {

template <class... Fs> struct overloaded : Fs... { using Fs::operator()...; };
template <class... Fs> overloaded(Fs...) -> overloaded<Fs...>;

void check_dim(const Objective &obj, const ConstVectorRef &w, const char *op) {
  if (w.size() != obj.dim())
    throw std::invalid_argument(std::string(op) + ": dimension mismatch (expected " +
                                std::to_string(obj.dim()) + ", got " +
                                std::to_string(w.size()) + ")");
}

// log(1 + exp(-z)) without overflow.
double logistic_loss(double z) { return std::log1p(std::exp(-std::abs(z))) + std::max(-z, 0.0); }

// 1 / (1 + exp(z)), the magnitude of d/dz log(1 + exp(-z)).
double sigmoid_neg(double z) {
  if (z >= 0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

} // namespace

Objective::Objective(Payload payload, Index dim, double mu_est, double l_est)
    : payload_(std::move(payload)), dim_(dim), mu_est_(mu_est), l_est_(l_est) {
  if (dim_ < 1)
    throw std::invalid_argument("Objective: dimension must be positive");
  if (!(mu_est_ >= 0) || !(l_est_ >= mu_est_))
    throw std::invalid_argument("Objective: need 0 <= mu_est <= l_est");
}

Objective make_quadratic(Vector spectrum, Vector shift, double sigma) {
  if (spectrum.size() < 1 || spectrum.size() != shift.size())
    throw std::invalid_argument("make_quadratic: spectrum and shift must have equal positive length");
  if ((spectrum.array() < 0).any() || !spectrum.allFinite() || !shift.allFinite())
    throw std::invalid_argument("make_quadratic: spectrum must be finite and nonnegative");
  if (!(sigma >= 0))
    throw std::invalid_argument("make_quadratic: sigma must be nonnegative");
  const Index dim = spectrum.size();
  const double mu = spectrum.minCoeff();
  const double L = spectrum.maxCoeff();
  return Objective(QuadraticObjective{std::move(spectrum), std::move(shift), sigma}, dim, mu, L);
}

Objective make_zero_objective(Index dim) {
  return make_quadratic(Vector::Zero(dim), Vector::Zero(dim));
}

std::pair<double, double> smoothness_bounds(const Dataset &ds, double lambda) {
  if (ds.n() < 1)
    throw Error(ErrorKind::data, "smoothness_bounds: empty dataset");
  if (!(lambda >= 0))
    throw std::invalid_argument("smoothness_bounds: lambda must be nonnegative");
  const double total = ds.features.squaredNorm();
  return {lambda, total / (4.0 * static_cast<double>(ds.n())) + lambda};
}

Objective make_logistic(std::shared_ptr<const Dataset> data, double lambda) {
  if (!data)
    throw std::invalid_argument("make_logistic: null dataset");
  const auto [mu, L] = smoothness_bounds(*data, lambda);
  const Index dim = data->dim();
  return Objective(LogisticObjective{std::move(data), lambda}, dim, mu, L);
}

Objective augment(const Objective &obj, double lambda, const Vector &w0) {
  if (!(lambda > 0))
    throw std::invalid_argument("augment: lambda must be positive");
  if (w0.size() != obj.dim())
    throw std::invalid_argument("augment: anchor dimension mismatch");
  return Objective(AugmentedObjective{std::make_shared<const Objective>(obj), lambda, w0},
                   obj.dim(), obj.mu_est() + lambda, obj.l_est() + lambda);
}

double eval(const Objective &obj, const ConstVectorRef &w) {
  check_dim(obj, w, "eval");
  if (!w.allFinite())
    throw std::domain_error("eval: non-finite input");
  return std::visit(
      overloaded{
          [&](const QuadraticObjective &q) {
            return 0.5 * (q.spectrum.array() * (w - q.shift).array().square()).sum();
          },
          [&](const LogisticObjective &l) {
            const Vector margins = l.data->labels.cwiseProduct(l.data->features * w);
            const double loss = margins.unaryExpr(&logistic_loss).sum();
            return loss / static_cast<double>(l.data->n()) + 0.5 * l.lambda * w.squaredNorm();
          },
          [&](const AugmentedObjective &a) {
            return eval(*a.inner, w) + 0.5 * a.lambda * (w - a.anchor).squaredNorm();
          }},
      obj.payload());
}

Vector grad(const Objective &obj, const ConstVectorRef &w) {
  check_dim(obj, w, "grad");
  return std::visit(
      overloaded{
          [&](const QuadraticObjective &q) -> Vector {
            return q.spectrum.cwiseProduct(w - q.shift);
          },
          [&](const LogisticObjective &l) -> Vector {
            const Dataset &ds = *l.data;
            const Vector margins = ds.labels.cwiseProduct(ds.features * w);
            const Vector coef =
                -ds.labels.cwiseProduct(margins.unaryExpr(&sigmoid_neg)) /
                static_cast<double>(ds.n());
            return ds.features.transpose() * coef + l.lambda * w;
          },
          [&](const AugmentedObjective &a) -> Vector {
            return grad(*a.inner, w) + a.lambda * (w - a.anchor);
          }},
      obj.payload());
}

Vector stoch_grad(const Objective &obj, const ConstVectorRef &w, RngStream &stream) {
  check_dim(obj, w, "stoch_grad");
  return std::visit(
      overloaded{
          [&](const QuadraticObjective &q) -> Vector {
            const double scale = q.sigma / std::sqrt(static_cast<double>(q.spectrum.size()));
            return q.spectrum.cwiseProduct(w - q.shift) +
                   scale * draw_gaussian(stream, q.spectrum.size());
          },
          [&](const LogisticObjective &l) -> Vector {
            const Dataset &ds = *l.data;
            const Index i = draw_index(stream, ds.n());
            const double y = ds.labels[i];
            double dot = 0.0;
            for (SparseRowMatrix::InnerIterator it(ds.features, i); it; ++it)
              dot += it.value() * w[it.col()];
            const double margin = y * dot;
            Vector g = l.lambda * w;
            const double c = -y * sigmoid_neg(margin);
            for (SparseRowMatrix::InnerIterator it(ds.features, i); it; ++it)
              g[it.col()] += c * it.value();
            return g;
          },
          [&](const AugmentedObjective &a) -> Vector {
            return stoch_grad(*a.inner, w, stream) + a.lambda * (w - a.anchor);
          }},
      obj.payload());
}

} // namespace fedac
