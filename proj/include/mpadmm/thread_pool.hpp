#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mpadmm {

/// Fixed-size worker pool for row-parallel loops.
///
/// parallel_for splits [0, count) into contiguous blocks, one per worker. Each
/// index is processed by exactly one worker, so results are independent of the
/// worker count as long as the body only writes to its own index.
class ThreadPool {
 public:
  explicit ThreadPool(std::size_t threads);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  std::size_t size() const { return workers_.size() + 1; }

  /// body(begin, end) is invoked on disjoint ranges covering [0, count).
  /// The calling thread takes the first block. Rethrows the first exception.
  void parallel_for(std::size_t count,
                    const std::function<void(std::size_t, std::size_t)>& body);

 private:
  void worker_loop(std::size_t slot);

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t, std::size_t)>* body_ = nullptr;
  std::size_t count_ = 0;
  std::size_t generation_ = 0;
  std::size_t pending_ = 0;
  bool stopping_ = false;
  std::exception_ptr error_;
};

/// Number of threads used when the caller does not specify one.
std::size_t default_thread_count();

}  // namespace mpadmm
