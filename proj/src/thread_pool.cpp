#include "mpadmm/thread_pool.hpp"

#include <algorithm>

namespace mpadmm {

namespace {

std::pair<std::size_t, std::size_t> block_range(std::size_t count, std::size_t parts,
                                                std::size_t slot) {
  const std::size_t base = count / parts;
  const std::size_t extra = count % parts;
  const std::size_t begin = slot * base + std::min(slot, extra);
  return {begin, begin + base + (slot < extra ? 1 : 0)};
}

}  // namespace

ThreadPool::ThreadPool(std::size_t threads) {
  const std::size_t extra = threads > 1 ? threads - 1 : 0;
  workers_.reserve(extra);
  for (std::size_t s = 0; s < extra; ++s) {
    workers_.emplace_back([this, s] { worker_loop(s + 1); });
  }
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  start_cv_.notify_all();
  for (auto& w : workers_) w.join();
}

void ThreadPool::parallel_for(
    std::size_t count, const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  if (workers_.empty()) {
    body(0, count);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    body_ = &body;
    count_ = count;
    pending_ = workers_.size();
    error_ = nullptr;
    ++generation_;
  }
  start_cv_.notify_all();

  std::exception_ptr local_error;
  const auto [begin, end] = block_range(count, size(), 0);
  try {
    if (begin < end) body(begin, end);
  } catch (...) {
    local_error = std::current_exception();
  }

  std::unique_lock lock(mutex_);
  done_cv_.wait(lock, [this] { return pending_ == 0; });
  body_ = nullptr;
  if (local_error) std::rethrow_exception(local_error);
  if (error_) std::rethrow_exception(error_);
}

void ThreadPool::worker_loop(std::size_t slot) {
  std::size_t seen = 0;
  for (;;) {
    const std::function<void(std::size_t, std::size_t)>* body = nullptr;
    std::size_t count = 0;
    {
      std::unique_lock lock(mutex_);
      start_cv_.wait(lock, [&] { return stopping_ || generation_ != seen; });
      if (stopping_) return;
      seen = generation_;
      body = body_;
      count = count_;
    }
    const auto [begin, end] = block_range(count, size(), slot);
    std::exception_ptr err;
    try {
      if (begin < end) (*body)(begin, end);
    } catch (...) {
      err = std::current_exception();
    }
    {
      std::lock_guard lock(mutex_);
      if (err && !error_) error_ = err;
      if (--pending_ == 0) done_cv_.notify_one();
    }
  }
}

std::size_t default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return std::clamp<std::size_t>(hw == 0 ? 1 : hw, 1, 24);
}

}  // namespace mpadmm
