#pragma once

#include <string>

#include "fedac/types.hpp"

namespace fedac {

/// Step sizes and couplings of generalized accelerated SGD:
///   w_md = w / beta + (1 - 1/beta) w_ag
///   w_ag' = w_md - eta g
///   w'    = (1 - 1/alpha) w + w_md / alpha - gamma g
struct Hyper {
  double eta = 0.0;
  double gamma = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
};

/// Throws std::invalid_argument unless eta > 0, gamma >= eta, alpha >= 1, beta >= 1.
void validate(const Hyper &hyper);

/// gamma = max(sqrt(eta/(mu K)), eta), alpha = 1/(gamma mu), beta = alpha + 1.
Hyper schedule_fedac1(double eta, double mu, Index K);

/// gamma as FedAc-I, alpha = 3/(2 gamma mu) - 1/2, beta = (2 alpha^2 - 1)/(alpha - 1).
/// Throws std::invalid_argument when alpha <= 1 (gamma mu >= 1).
Hyper schedule_fedac2(double eta, double mu, Index K);

/// gamma = sqrt(eta/mu), alpha = 1/(gamma mu), beta = alpha + 1.
Hyper schedule_vanilla(double eta, double mu);

std::string to_string(const Hyper &hyper);

} // namespace fedac
