#pragma once

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "fedac/types.hpp"

namespace fedac {

/// Fixed-size fork/join pool. parallel_for splits [0, n) into one contiguous
/// chunk per thread; the calling thread runs chunk 0. With one thread every
/// call runs inline.
class ThreadPool {
public:
  explicit ThreadPool(int threads = 1);
  ~ThreadPool();

  ThreadPool(const ThreadPool &) = delete;
  ThreadPool &operator=(const ThreadPool &) = delete;

  int size() const noexcept { return static_cast<int>(workers_.size()) + 1; }

  /// Blocks until fn(i) ran for every i. If any call throws, the exception
  /// from the lowest-indexed failing chunk is rethrown.
  void parallel_for(Index n, const std::function<void(Index)> &fn);

private:
  void worker_loop(int slot);
  void run_chunk(int slot);

  std::vector<std::jthread> workers_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(Index)> *job_ = nullptr;
  Index job_n_ = 0;
  std::uint64_t generation_ = 0;
  int pending_ = 0;
  bool stopping_ = false;
  std::vector<std::exception_ptr> errors_;
};

} // namespace fedac
