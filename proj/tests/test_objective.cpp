#include <doctest.h>

#include <cmath>
#include <memory>

#include "fedac/error.hpp"
#include "fedac/objective.hpp"

using namespace fedac;

namespace {

std::shared_ptr<const Dataset> data(const std::string &text, std::optional<Index> dim = {}) {
  return std::make_shared<const Dataset>(parse_libsvm(text, dim));
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs)
    v[i++] = x;
  return v;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

TEST_CASE("eval examples") {
  CHECK(eval(make_quadratic(vec({1}), vec({3})), vec({3})) == 0.0);
  const Objective one = make_logistic(data("+1 1:1\n", 2), 0.0);
  CHECK(eval(one, vec({0, 0})) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(eval(augment(make_zero_objective(1), 1.0, vec({0})), vec({2})) == 2.0);
}

TEST_CASE("grad examples") {
  CHECK(grad(make_quadratic(vec({2}), vec({0})), vec({3})) == vec({6}));
  const Objective one = make_logistic(data("+1 1:1\n", 2), 0.0);
  CHECK(grad(one, vec({0, 0})) == vec({-0.5, 0}));
  const Objective aug = augment(make_quadratic(vec({1}), vec({0})), 1.0, vec({0}));
  CHECK(grad(aug, vec({2})) == vec({4}));
}

TEST_CASE("logistic value and gradient against a direct formula") {
  const auto ds = data("+1 1:1 2:-2\n-1 2:0.5 3:1\n+1 1:-1 3:3\n");
  const double lambda = 0.1;
  const Objective obj = make_logistic(ds, lambda);
  const Vector w = vec({0.3, -0.7, 0.2});
  const Eigen::MatrixXd X(ds->features);
  double f = 0.0;
  Vector g = Vector::Zero(3);
  for (Index i = 0; i < 3; ++i) {
    const double z = ds->labels[i] * X.row(i).dot(w);
    f += std::log(1.0 + std::exp(-z)) / 3.0;
    g += -ds->labels[i] * sigmoid(-z) * X.row(i).transpose() / 3.0;
  }
  f += 0.5 * lambda * w.squaredNorm();
  g += lambda * w;
  CHECK(eval(obj, w) == doctest::Approx(f).epsilon(1e-14));
  CHECK((grad(obj, w) - g).norm() <= 1e-15);
}

TEST_CASE("logistic loss stays finite for huge margins") {
  const Objective obj = make_logistic(data("+1 1:1\n-1 1:1\n"), 0.0);
  const Vector w = vec({800.0});
  CHECK(eval(obj, w) == doctest::Approx(400.0));
  CHECK(grad(obj, w).allFinite());
  CHECK(grad(obj, w)[0] == doctest::Approx(0.5));
}

TEST_CASE("dimension mismatch and non-finite input") {
  const Objective q = make_quadratic(vec({1, 2}), vec({0, 0}));
  CHECK_THROWS_AS(eval(q, vec({1})), std::invalid_argument);
  CHECK_THROWS_AS(grad(q, vec({1, 2, 3})), std::invalid_argument);
  RngStream s = make_stream(1, 0);
  CHECK_THROWS_AS(stoch_grad(q, vec({1}), s), std::invalid_argument);
  CHECK_THROWS_AS(eval(q, vec({NAN, 0})), std::domain_error);
  CHECK_THROWS_AS(eval(q, vec({INFINITY, 0})), std::domain_error);
}

TEST_CASE("constants") {
  const Objective q = make_quadratic(vec({0.5, 3, 1}), vec({0, 0, 0}));
  CHECK(q.mu_est() == 0.5);
  CHECK(q.l_est() == 3.0);
  const Objective a = augment(make_quadratic(vec({1}), vec({0})), 1.0, vec({5}));
  CHECK(a.mu_est() == 2.0);
  CHECK(a.l_est() == 2.0);
  CHECK_THROWS_AS(augment(q, 0.0, Vector::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(augment(q, -1.0, Vector::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(make_quadratic(vec({-1}), vec({0})), std::invalid_argument);
  const Objective logistic = make_logistic(data("+1 1:2\n"), 0.5);
  CHECK(logistic.mu_est() == 0.5);
}

TEST_CASE("smoothness bounds") {
  CHECK(smoothness_bounds(parse_libsvm("+1 1:2\n", 2), 0.5) == std::pair{0.5, 1.5});
  CHECK(smoothness_bounds(parse_libsvm("+1\n-1\n", 3), 1.0) == std::pair{1.0, 1.0});
  CHECK(smoothness_bounds(parse_libsvm("+1 1:1\n-1 2:1\n"), 0.0) == std::pair{0.0, 0.25});
  CHECK_THROWS_AS(smoothness_bounds(parse_libsvm("", 3), 1.0), Error);
}

TEST_CASE("stochastic oracles without randomness") {
  const Objective q = make_quadratic(vec({2}), vec({0}), 0.0);
  const Objective one = make_logistic(data("+1 1:1 2:3\n"), 0.2);
  const Vector w = vec({0.4, -0.1});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream s = make_stream(seed, 0);
    CHECK(stoch_grad(q, vec({3}), s) == vec({6}));
    RngStream t = make_stream(seed, 1);
    CHECK((stoch_grad(one, w, t) - grad(one, w)).norm() <= 1e-16);
  }
}

TEST_CASE("stochastic gradient draw costs") {
  const Objective q = make_quadratic(Vector::Ones(5), Vector::Zero(5), 1.0);
  RngStream s = make_stream(1, 0);
  stoch_grad(q, Vector::Zero(5), s);
  CHECK(s.counter == 3);
  const Objective logistic = make_logistic(data("+1 1:1\n-1 1:2\n+1 2:1\n"), 0.1);
  RngStream t = make_stream(1, 0);
  stoch_grad(logistic, Vector::Zero(2), t);
  CHECK(t.counter == 1);
  const Objective aug = augment(logistic, 0.5, Vector::Ones(2));
  stoch_grad(aug, Vector::Zero(2), t);
  CHECK(t.counter == 2);
}

TEST_CASE("quadratic noise: mean and total variance") {
  const Objective q = make_quadratic(vec({2}), vec({1}), 1.0);
  const Vector w = vec({0.5});
  const double g = grad(q, w)[0];
  RngStream s = make_stream(99, 0);
  const int N = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < N; ++i) {
    const double z = stoch_grad(q, w, s)[0] - g;
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / N) <= 3e-2);
  CHECK(sq / N == doctest::Approx(1.0).epsilon(0.03));

  // sigma^2 split evenly over coordinates
  const Objective wide = make_quadratic(Vector::Ones(4), Vector::Zero(4), 2.0);
  RngStream t = make_stream(5, 0);
  double total = 0.0;
  for (int i = 0; i < 20000; ++i)
    total += stoch_grad(wide, Vector::Zero(4), t).squaredNorm();
  CHECK(total / 20000 == doctest::Approx(4.0).epsilon(0.03));
}

TEST_CASE("logistic stochastic gradient is unbiased") {
  const auto ds = std::make_shared<const Dataset>(make_synthetic_binary(50, 8, 3, 21));
  const Objective obj = make_logistic(ds, 0.05);
  const Vector w = Vector::LinSpaced(8, -1.0, 1.0);
  const Vector g = grad(obj, w);
  RngStream s = make_stream(4, 0);
  const int N = 100000;
  Vector sum = Vector::Zero(8), sq = Vector::Zero(8);
  for (int i = 0; i < N; ++i) {
    const Vector x = stoch_grad(obj, w, s);
    sum += x;
    sq += x.cwiseProduct(x);
  }
  const Vector mean = sum / N;
  const Vector sd = (sq / N - mean.cwiseProduct(mean)).cwiseMax(0.0).cwiseSqrt();
  for (Index j = 0; j < 8; ++j)
    CHECK(std::abs(mean[j] - g[j]) <= 5.0 * sd[j] / std::sqrt(N) + 1e-15);
}

TEST_CASE("logistic strong convexity probe") {
  const auto ds = std::make_shared<const Dataset>(make_synthetic_binary(100, 6, 3, 8));
  const double lambda = 0.3;
  const Objective obj = make_logistic(ds, lambda);
  RngStream s = make_stream(12, 0);
  for (int i = 0; i < 50; ++i) {
    const Vector w = 3.0 * draw_gaussian(s, 6), u = 3.0 * draw_gaussian(s, 6);
    const double lower =
        eval(obj, w) + grad(obj, w).dot(u - w) + 0.5 * lambda * (u - w).squaredNorm();
    CHECK(eval(obj, u) >= lower - 1e-12);
  }
}

TEST_CASE("augmentation identity and anchor gradient") {
  const auto ds = std::make_shared<const Dataset>(make_synthetic_binary(40, 5, 2, 2));
  const Objective inner = make_logistic(ds, 0.01);
  RngStream s = make_stream(3, 0);
  const Vector anchor = draw_gaussian(s, 5);
  const Objective aug = augment(inner, 0.7, anchor);
  for (int i = 0; i < 20; ++i) {
    const Vector w = draw_gaussian(s, 5);
    CHECK(std::abs(eval(aug, w) - eval(inner, w) - 0.35 * (w - anchor).squaredNorm()) <= 1e-12);
  }
  CHECK(grad(aug, anchor) == grad(inner, anchor));
}

TEST_CASE("gradients match central differences") {
  RngStream s = make_stream(31, 0);
  const auto ds = std::make_shared<const Dataset>(make_synthetic_binary(80, 5, 2, 6));
  const Objective logistic = make_logistic(ds, 0.02);
  const Objective quad = make_quadratic(Vector::LinSpaced(5, 0.1, 3.0), draw_gaussian(s, 5), 1.0);
  const Objective aug = augment(logistic, 0.4, draw_gaussian(s, 5));
  for (const Objective *obj : {&logistic, &quad, &aug}) {
    for (int p = 0; p < 20; ++p) {
      const Vector w = 2.0 * draw_gaussian(s, 5);
      const Vector g = grad(*obj, w);
      for (Index j = 0; j < 5; ++j) {
        const double h = 1e-6 * (1.0 + std::abs(w[j]));
        Vector up = w, down = w;
        up[j] += h;
        down[j] -= h;
        const double fd = (eval(*obj, up) - eval(*obj, down)) / (up[j] - down[j]);
        CHECK(std::abs(fd - g[j]) <= 1e-6 * std::max(1.0, std::abs(g[j])));
      }
    }
  }
}
