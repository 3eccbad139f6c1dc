#include <doctest.h>

#include "fedac/schedule.hpp"

using namespace fedac;
using doctest::Approx;

TEST_CASE("FedAc-I schedule") {
  const Hyper a = schedule_fedac1(0.01, 1.0, 4);
  CHECK(a.gamma == Approx(0.05).epsilon(1e-15));
  CHECK(a.alpha == Approx(20.0).epsilon(1e-14));
  CHECK(a.beta == Approx(21.0).epsilon(1e-14));

  const Hyper b = schedule_fedac1(0.25, 1.0, 1);
  CHECK(b.gamma == 0.5);
  CHECK(b.alpha == 2.0);
  CHECK(b.beta == 3.0);

  const Hyper c = schedule_fedac1(1.0, 1.0, 1);
  CHECK(c.gamma == 1.0);
  CHECK(c.alpha == 1.0);
  CHECK(c.beta == 2.0);

  CHECK_THROWS_AS(schedule_fedac1(0.1, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(schedule_fedac1(0.1, -1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(schedule_fedac1(0.0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(schedule_fedac1(0.1, 1.0, 0), std::invalid_argument);
}

TEST_CASE("FedAc-II schedule") {
  const Hyper a = schedule_fedac2(0.01, 1.0, 4);
  CHECK(a.gamma == Approx(0.05).epsilon(1e-15));
  CHECK(a.alpha == Approx(29.5).epsilon(1e-14));
  CHECK(a.beta == Approx(1739.5 / 28.5).epsilon(1e-14));
  CHECK(a.beta == Approx(61.035088).epsilon(1e-7));

  const Hyper b = schedule_fedac2(0.04, 1.0, 1);
  CHECK(b.gamma == Approx(0.2).epsilon(1e-15));
  CHECK(b.alpha == Approx(7.0).epsilon(1e-14));
  CHECK(b.beta == Approx(97.0 / 6.0).epsilon(1e-14));

  CHECK_THROWS_AS(schedule_fedac2(1.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("vanilla schedule") {
  const Hyper a = schedule_vanilla(0.01, 1.0);
  CHECK(a.gamma == Approx(0.1).epsilon(1e-15));
  CHECK(a.alpha == Approx(10.0).epsilon(1e-14));
  CHECK(a.beta == Approx(11.0).epsilon(1e-14));

  const Hyper b = schedule_vanilla(1.0, 1.0);
  CHECK(b.gamma == 1.0);
  CHECK(b.alpha == 1.0);
  CHECK(b.beta == 2.0);

  const Hyper c = schedule_vanilla(0.04, 0.25);
  CHECK(c.gamma == Approx(0.4).epsilon(1e-15));
  CHECK(c.alpha == Approx(10.0).epsilon(1e-14));
  CHECK(c.beta == Approx(11.0).epsilon(1e-14));
}

TEST_CASE("schedules satisfy the hyperparameter invariants when eta <= 1/L") {
  for (double mu : {1e-4, 1e-2, 0.5})
    for (double kappa : {2.0, 10.0, 1e3})
      for (double frac : {1.0, 0.1, 0.001})
        for (Index K : {1, 4, 64}) {
          const double eta = frac / (mu * kappa);
          CHECK_NOTHROW(validate(schedule_fedac1(eta, mu, K)));
          CHECK_NOTHROW(validate(schedule_fedac2(eta, mu, K)));
          CHECK_NOTHROW(validate(schedule_vanilla(eta, mu)));
        }
}

TEST_CASE("validate rejects out-of-range hyperparameters") {
  CHECK_THROWS_AS(validate({0.0, 1.0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate({0.5, 0.4, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate({0.5, 0.5, 0.9, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate({0.5, 0.5, 1.0, 0.9}), std::invalid_argument);
  CHECK_NOTHROW(validate({0.5, 0.5, 1.0, 1.0}));
}
