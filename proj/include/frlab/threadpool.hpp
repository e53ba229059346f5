#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace frlab {

/// Persistent worker pool for data-parallel loops over environment shards.
/// Work is statically partitioned, so results do not depend on scheduling;
/// a single-worker pool runs inline.
class ThreadPool {
 public:
  explicit ThreadPool(int workers) : workers_(std::max(1, workers)) {
    for (int w = 1; w < workers_; ++w) {
      threads_.emplace_back([this, w] { worker_loop(w); });
    }
  }

  ~ThreadPool() {
    {
      std::unique_lock<std::mutex> lock(mutex_);
      stop_ = true;
      generation_++;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  int workers() const { return workers_; }

  /// Calls fn(i) for i in [0, n); blocks until all calls complete.
  void parallel_for(int n, const std::function<void(int)>& fn) {
    if (workers_ == 1 || n <= 1) {
      for (int i = 0; i < n; ++i) fn(i);
      return;
    }
    {
      std::unique_lock<std::mutex> lock(mutex_);
      fn_ = &fn;
      n_ = n;
      pending_ = workers_ - 1;
      generation_++;
    }
    cv_.notify_all();
    run_shard(0);
    std::unique_lock<std::mutex> lock(mutex_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    fn_ = nullptr;
  }

 private:
  void run_shard(int w) {
    int per = (n_ + workers_ - 1) / workers_;
    int lo = w * per;
    int hi = std::min(n_, lo + per);
    for (int i = lo; i < hi; ++i) (*fn_)(i);
  }

  void worker_loop(int w) {
    long seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [this, &seen] { return stop_ || generation_ != seen; });
        seen = generation_;
        if (stop_) return;
      }
      run_shard(w);
      {
        std::unique_lock<std::mutex> lock(mutex_);
        if (--pending_ == 0) done_cv_.notify_all();
      }
    }
  }

  int workers_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable cv_, done_cv_;
  const std::function<void(int)>* fn_ = nullptr;
  int n_ = 0;
  int pending_ = 0;
  long generation_ = 0;
  bool stop_ = false;
};

}  // namespace frlab
