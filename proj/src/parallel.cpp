#include "fedac/parallel.hpp"

#include <algorithm>
#include <stdexcept>

namespace fedac {

ThreadPool::ThreadPool(int threads) {
  if (threads < 1)
    throw std::invalid_argument("ThreadPool: need at least one thread");
  errors_.resize(static_cast<std::size_t>(threads));
  workers_.reserve(static_cast<std::size_t>(threads - 1));
  for (int slot = 1; slot < threads; ++slot)
    workers_.emplace_back([this, slot] { worker_loop(slot); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  start_cv_.notify_all();
  workers_.clear(); // joins
}

void ThreadPool::run_chunk(int slot) {
  const Index parts = size();
  const Index begin = job_n_ * slot / parts;
  const Index end = job_n_ * (slot + 1) / parts;
  try {
    for (Index i = begin; i < end; ++i)
      (*job_)(i);
  } catch (...) {
    errors_[static_cast<std::size_t>(slot)] = std::current_exception();
  }
}

void ThreadPool::worker_loop(int slot) {
  std::uint64_t seen = 0;
  for (;;) {
    {
      std::unique_lock lock(mutex_);
      start_cv_.wait(lock, [&] { return stopping_ || generation_ != seen; });
      if (stopping_)
        return;
      seen = generation_;
    }
    run_chunk(slot);
    {
      std::lock_guard lock(mutex_);
      if (--pending_ == 0)
        done_cv_.notify_one();
    }
  }
}

void ThreadPool::parallel_for(Index n, const std::function<void(Index)> &fn) {
  if (n <= 0)
    return;
  if (workers_.empty()) {
    for (Index i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::fill(errors_.begin(), errors_.end(), nullptr);
  {
    std::lock_guard lock(mutex_);
    job_ = &fn;
    job_n_ = n;
    pending_ = static_cast<int>(workers_.size());
    ++generation_;
  }
  start_cv_.notify_all();
  run_chunk(0);
  {
    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [&] { return pending_ == 0; });
    job_ = nullptr;
  }
  for (const auto &err : errors_)
    if (err)
      std::rethrow_exception(err);
}

} // namespace fedac
