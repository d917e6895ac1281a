#include "pscforge/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pscforge {

namespace {

int default_workers() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  return static_cast<int>(std::min(hw, 16u));
}

std::atomic<int> g_workers{default_workers()};

}  // namespace

int worker_count() { return g_workers.load(std::memory_order_relaxed); }

void set_worker_count(int n) {
  g_workers.store(std::max(1, n), std::memory_order_relaxed);
}

void parallel_for(std::size_t blocks, const std::function<void(std::size_t)>& fn) {
  if (blocks == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(worker_count()), blocks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < blocks; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= blocks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pscforge
