#include "fedac/error.hpp"

namespace fedac {

const char *to_string(ErrorKind kind) noexcept {
  switch (kind) {
  case ErrorKind::usage:
    return "usage";
  case ErrorKind::data:
    return "data";
  case ErrorKind::numerical:
    return "numerical";
  case ErrorKind::verification:
    return "verification";
  }
  return "unknown";
}

DivergenceError::DivergenceError(Index step, Index worker)
    : Error(ErrorKind::numerical, "non-finite iterate at step " +
                                      std::to_string(step) + " on worker " +
                                      std::to_string(worker)),
      step_(step), worker_(worker) {}

} // namespace fedac
