#include "fedac/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fedac {

namespace {

void check_inputs(double eta, double mu, Index K) {
  if (!(eta > 0))
    throw std::invalid_argument("schedule: eta must be positive");
  if (!(mu > 0))
    throw std::invalid_argument("schedule: mu must be positive");
  if (K < 1)
    throw std::invalid_argument("schedule: K must be at least 1");
}

double fedac_gamma(double eta, double mu, Index K) {
  return std::max(std::sqrt(eta / (mu * static_cast<double>(K))), eta);
}

} // namespace

void validate(const Hyper &h) {
  if (!(h.eta > 0) || !(h.gamma >= h.eta) || !(h.alpha >= 1) || !(h.beta >= 1) ||
      !std::isfinite(h.gamma) || !std::isfinite(h.alpha) || !std::isfinite(h.beta))
    throw std::invalid_argument("invalid hyperparameters " + to_string(h) +
                                " (need eta > 0, gamma >= eta, alpha >= 1, beta >= 1)");
}

Hyper schedule_fedac1(double eta, double mu, Index K) {
  check_inputs(eta, mu, K);
  const double gamma = fedac_gamma(eta, mu, K);
  const double alpha = 1.0 / (gamma * mu);
  return {eta, gamma, alpha, alpha + 1.0};
}

Hyper schedule_fedac2(double eta, double mu, Index K) {
  check_inputs(eta, mu, K);
  const double gamma = fedac_gamma(eta, mu, K);
  const double alpha = 3.0 / (2.0 * gamma * mu) - 0.5;
  if (!(alpha > 1.0))
    throw std::invalid_argument("schedule_fedac2: alpha <= 1 (gamma * mu >= 1, eta too large)");
  return {eta, gamma, alpha, (2.0 * alpha * alpha - 1.0) / (alpha - 1.0)};
}

Hyper schedule_vanilla(double eta, double mu) {
  check_inputs(eta, mu, 1);
  const double gamma = std::sqrt(eta / mu);
  const double alpha = 1.0 / (gamma * mu);
  return {eta, gamma, alpha, alpha + 1.0};
}

std::string to_string(const Hyper &h) {
  std::ostringstream os;
  os.precision(17);
  os << "(eta=" << h.eta << ", gamma=" << h.gamma << ", alpha=" << h.alpha
     << ", beta=" << h.beta << ")";
  return os.str();
}

} // namespace fedac
