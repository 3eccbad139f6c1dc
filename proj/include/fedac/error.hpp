#pragma once

#include <stdexcept>
#include <string>

#include "fedac/types.hpp"

namespace fedac {

/// Failure classes surfaced to the command line as distinct exit codes.
enum class ErrorKind { usage = 1, data = 2, numerical = 3, verification = 4 };

const char *to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// A non-finite iterate appeared at local step `step` on worker `worker`.
class DivergenceError : public Error {
public:
  DivergenceError(Index step, Index worker);
  Index step() const noexcept { return step_; }
  Index worker() const noexcept { return worker_; }

private:
  Index step_;
  Index worker_;
};

} // namespace fedac
